// SPDX-License-Identifier: Apache-2.0

#include "cvecwe/config.hpp"

#include <filesystem>
#include <nlohmann/json.hpp>
#include <set>

#include "cvecwe/errors.hpp"
#include "cvecwe/hashing.hpp"

namespace cvecwe {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ValidationError("config section '" + where + "' must be an object");
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.count(key)) throw ValidationError("unknown config key '" + where + key + "'");
    }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
    if (auto it = obj.find(key); it != obj.end() && !it->is_null()) out = it->get<T>();
}

}  // namespace

RunConfig parse_run_config(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text.begin(), json_text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed config JSON: ") + e.what(), 0, e.byte);
    }
    RunConfig cfg;
    try {
        reject_unknown(j, {"schema_version", "seed", "strict", "paths", "filter", "split", "vectorizer", "train", "eval"}, "");
        read(j, "schema_version", cfg.schema_version);
        if (cfg.schema_version != kConfigSchemaVersion) {
            throw ValidationError("unsupported config schema_version " + std::to_string(cfg.schema_version));
        }
        read(j, "seed", cfg.seed);
        read(j, "strict", cfg.strict);

        if (auto it = j.find("paths"); it != j.end()) {
            reject_unknown(*it, {"feeds", "feed_format", "records", "ai_labels", "taxonomy", "taxonomy_format",
                                 "vocabulary", "banned_ids", "output_dir"}, "paths.");
            read(*it, "feeds", cfg.paths.feeds);
            read(*it, "feed_format", cfg.paths.feed_format);
            read(*it, "records", cfg.paths.records);
            read(*it, "ai_labels", cfg.paths.ai_labels);
            read(*it, "taxonomy", cfg.paths.taxonomy);
            read(*it, "taxonomy_format", cfg.paths.taxonomy_format);
            read(*it, "vocabulary", cfg.paths.vocabulary);
            read(*it, "banned_ids", cfg.paths.banned_ids);
            read(*it, "output_dir", cfg.paths.output_dir);
        }
        if (auto it = j.find("filter"); it != j.end()) {
            reject_unknown(*it, {"min_length", "reject_markers"}, "filter.");
            read(*it, "min_length", cfg.filter.min_length);
            read(*it, "reject_markers", cfg.filter.reject_markers);
        }
        if (auto it = j.find("split"); it != j.end()) {
            reject_unknown(*it, {"eval_fraction", "val_share", "equivalence_depth"}, "split.");
            read(*it, "eval_fraction", cfg.eval_fraction);
            read(*it, "val_share", cfg.val_share);
            read(*it, "equivalence_depth", cfg.equivalence_depth);
        }
        if (auto it = j.find("vectorizer"); it != j.end()) {
            reject_unknown(*it, {"max_features", "lowercase", "ngram_min", "ngram_max", "min_token_length"}, "vectorizer.");
            read(*it, "max_features", cfg.vectorizer.max_features);
            read(*it, "lowercase", cfg.vectorizer.tokenizer.lowercase);
            read(*it, "ngram_min", cfg.vectorizer.tokenizer.ngram_min);
            read(*it, "ngram_max", cfg.vectorizer.tokenizer.ngram_max);
            read(*it, "min_token_length", cfg.vectorizer.tokenizer.min_token_length);
        }
        if (auto it = j.find("train"); it != j.end()) {
            reject_unknown(*it, {"l2_lambda", "epochs", "batch_size", "learning_rate", "early_stop_patience"}, "train.");
            read(*it, "l2_lambda", cfg.train.l2_lambda);
            read(*it, "epochs", cfg.train.epochs);
            read(*it, "batch_size", cfg.train.batch_size);
            read(*it, "learning_rate", cfg.train.learning_rate);
            read(*it, "early_stop_patience", cfg.train.early_stop_patience);
        }
        if (auto it = j.find("eval"); it != j.end()) {
            reject_unknown(*it, {"ks", "alpha", "depth", "band_low", "band_high"}, "eval.");
            read(*it, "ks", cfg.eval.ks);
            read(*it, "alpha", cfg.eval.alpha);
            read(*it, "depth", cfg.eval.depth);
            read(*it, "band_low", cfg.eval.band_low);
            read(*it, "band_high", cfg.eval.band_high);
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config value has the wrong type: ") + e.what());
    }
    cfg.train.seed = cfg.seed;
    return cfg;
}

std::string run_config_to_json(const RunConfig& cfg) {
    nlohmann::ordered_json j;
    j["schema_version"] = cfg.schema_version;
    j["seed"] = cfg.seed;
    j["strict"] = cfg.strict;
    j["paths"] = {{"feeds", cfg.paths.feeds},
                  {"feed_format", cfg.paths.feed_format},
                  {"records", cfg.paths.records},
                  {"ai_labels", cfg.paths.ai_labels},
                  {"taxonomy", cfg.paths.taxonomy},
                  {"taxonomy_format", cfg.paths.taxonomy_format},
                  {"vocabulary", cfg.paths.vocabulary},
                  {"banned_ids", cfg.paths.banned_ids},
                  {"output_dir", cfg.paths.output_dir}};
    j["filter"] = {{"min_length", cfg.filter.min_length}, {"reject_markers", cfg.filter.reject_markers}};
    j["split"] = {{"eval_fraction", cfg.eval_fraction},
                  {"val_share", cfg.val_share},
                  {"equivalence_depth", cfg.equivalence_depth}};
    j["vectorizer"] = {{"max_features", cfg.vectorizer.max_features},
                       {"lowercase", cfg.vectorizer.tokenizer.lowercase},
                       {"ngram_min", cfg.vectorizer.tokenizer.ngram_min},
                       {"ngram_max", cfg.vectorizer.tokenizer.ngram_max},
                       {"min_token_length", cfg.vectorizer.tokenizer.min_token_length}};
    j["train"] = {{"l2_lambda", cfg.train.l2_lambda},
                  {"epochs", cfg.train.epochs},
                  {"batch_size", cfg.train.batch_size},
                  {"learning_rate", cfg.train.learning_rate},
                  {"early_stop_patience", cfg.train.early_stop_patience}};
    j["eval"] = {{"ks", cfg.eval.ks},
                 {"alpha", cfg.eval.alpha},
                 {"depth", cfg.eval.depth},
                 {"band_low", cfg.eval.band_low},
                 {"band_high", cfg.eval.band_high}};
    return j.dump(2) + "\n";
}

std::string config_digest(const RunConfig& cfg) {
    // Where outputs go does not change what they contain.
    RunConfig canonical = cfg;
    canonical.paths.output_dir.clear();
    return sha256_hex(run_config_to_json(canonical));
}

void require_existing(std::string_view what, const std::string& path) {
    if (path.empty()) throw ValidationError("no " + std::string(what) + " path configured");
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) throw IoError(std::string(what) + " not found: " + path);
}

}  // namespace cvecwe
