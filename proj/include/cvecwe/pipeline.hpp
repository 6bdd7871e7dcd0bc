// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cvecwe/corpus.hpp"
#include "cvecwe/cwe_id.hpp"
#include "cvecwe/taxonomy.hpp"

namespace cvecwe {

struct AiLabel {
    std::string cve_id;
    CweId ai_cwe;
};

enum class Agreement { Exact, HierarchyOnly, Disagree, NvdOnly, AiOnly, Unlabeled };

inline constexpr std::array<Agreement, 6> kAllAgreements{Agreement::Exact,   Agreement::HierarchyOnly,
                                                         Agreement::Disagree, Agreement::NvdOnly,
                                                         Agreement::AiOnly,   Agreement::Unlabeled};

std::string_view to_string(Agreement a);

struct MergedRecord {
    CveRecord record;
    std::optional<CweId> ai_cwe;
    Agreement agreement = Agreement::Unlabeled;
};

// JSONL {"cve_id": str, "ai_cwe": str}. Bad JSON or an invalid CWE token is
// a ParseError naming the line.
std::vector<AiLabel> parse_ai_labels(std::string_view source);

// Every record appears once, in input order. AI labels for ids absent from
// records are ignored. Throws ValidationError on a duplicated AI label id.
std::vector<MergedRecord> merge_labels(const std::vector<CveRecord>& records, const std::vector<AiLabel>& ai,
                                       const CweTaxonomy& taxonomy, int depth);

struct AgreementStats {
    std::size_t n_total = 0;
    std::size_t n_both = 0;  // records carrying both labels
    std::map<Agreement, std::size_t> counts;
    // Unset when n_both == 0.
    std::optional<double> exact_rate;
    std::optional<double> hierarchy_rate;
};

AgreementStats agreement_stats(const std::vector<MergedRecord>& merged);

// Rounds half away from zero to `places` decimals.
double round_to(double value, int places);

struct DecontaminationResult {
    std::vector<MergedRecord> clean;
    std::vector<MergedRecord> removed;
    std::vector<std::string> not_found;  // banned ids with no record, as given (trimmed)
};

// Matching trims whitespace and ignores ASCII case.
DecontaminationResult decontaminate(const std::vector<MergedRecord>& merged, const std::vector<std::string>& banned_ids);

// One id per line; '#' starts a comment.
std::vector<std::string> parse_banned_ids(std::string_view source);

struct SplitConfig {
    std::uint64_t seed = 42;
    double eval_fraction = 0.311;  // share of the exact-agreement pool sent to val+test
    double val_share = 0.501;      // val's share of that reserve
    std::vector<CweId> vocabulary;
    int equivalence_depth = 1;

    void validate() const;
};

enum class SplitName { Train, Val, Test };

// Pure function of (seed, cve_id, fractions): u = hash_to_unit(keyed_hash(seed,
// cve_id)); val if u < eval_fraction * val_share, test if u < eval_fraction,
// train otherwise.
SplitName assign_exact_record(std::uint64_t seed, std::string_view cve_id, double eval_fraction, double val_share);

struct SplitEntry {
    std::string cve_id;
    CweId label;
    std::string description;

    friend bool operator==(const SplitEntry&, const SplitEntry&) = default;
};

struct Exclusion {
    std::string cve_id;
    std::string reason;

    friend bool operator==(const Exclusion&, const Exclusion&) = default;
};

struct SplitAssignment {
    std::vector<SplitEntry> train;
    std::vector<SplitEntry> val;
    std::vector<SplitEntry> test;
    std::vector<Exclusion> excluded;
};

// Expects decontaminated input. Every list is sorted by cve_id.
SplitAssignment build_splits(const std::vector<MergedRecord>& merged, const SplitConfig& cfg);

// record-jsonl with {"cve_id","description","label"}.
std::string export_split_jsonl(const std::vector<SplitEntry>& entries);
std::vector<SplitEntry> parse_split_jsonl(std::string_view source);

struct WorksheetRow {
    std::string cve_id;
    std::string description;
    CweId nvd_cwe;
    CweId ai_cwe;
};

// Uniform sample without replacement among agreement=disagree records. The
// candidate pool is ordered by cve_id first, so the result depends only on the
// set of records and the seed. Throws ValidationError if n exceeds the pool.
std::vector<WorksheetRow> sample_disagreements(const std::vector<MergedRecord>& merged, std::size_t n,
                                               std::uint64_t seed);

// CSV with header "cve_id,description,nvd_cwe,ai_cwe,verdict"; verdict empty.
std::string export_worksheet_csv(const std::vector<WorksheetRow>& rows);

}  // namespace cvecwe
