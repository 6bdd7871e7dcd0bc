// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cvecwe/corpus.hpp"
#include "cvecwe/logreg.hpp"
#include "cvecwe/metrics.hpp"
#include "cvecwe/pipeline.hpp"
#include "cvecwe/taxonomy.hpp"
#include "cvecwe/vectorizer.hpp"

namespace cvecwe {

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr const char* kConfigEnvVar = "CVECWE_CONFIG";

struct RunPaths {
    std::vector<std::string> feeds;
    std::string feed_format = "nvd-json-2";
    std::string records;    // ingested record-jsonl
    std::string ai_labels;
    std::string taxonomy;
    std::string taxonomy_format = "edge-csv";
    std::string vocabulary;
    std::vector<std::string> banned_ids;
    std::string output_dir = "out";
};

// Everything a pipeline run needs. Split and train seeds both come from the
// single top-level seed.
struct RunConfig {
    int schema_version = kConfigSchemaVersion;
    std::uint64_t seed = 42;
    RunPaths paths;
    DescriptionFilter filter;
    double eval_fraction = 0.311;
    double val_share = 0.501;
    int equivalence_depth = 1;
    VectorizerConfig vectorizer;
    TrainConfig train;
    EvalOptions eval;
    bool strict = false;
};

// Unknown keys are a ValidationError; missing keys keep their defaults.
RunConfig parse_run_config(std::string_view json_text);

// Canonical JSON of the effective configuration (stable key order).
std::string run_config_to_json(const RunConfig& cfg);

// SHA-256 of run_config_to_json with output_dir blanked, embedded in output
// summaries.
std::string config_digest(const RunConfig& cfg);

// ValidationError when the path is unset, IoError when it does not exist.
void require_existing(std::string_view what, const std::string& path);

}  // namespace cvecwe
