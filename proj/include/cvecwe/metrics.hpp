// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cvecwe/cwe_id.hpp"
#include "cvecwe/errors.hpp"
#include "cvecwe/taxonomy.hpp"

namespace cvecwe {

struct ScoredLabel {
    CweId cwe;
    double score;

    friend bool operator==(const ScoredLabel&, const ScoredLabel&) = default;
};

// cve_id -> ranked labels. Each list is non-empty, ordered by descending
// score (equal scores by ascending CweId) and free of duplicate CWEs.
class PredictionSet {
public:
    void add(std::string cve_id, std::vector<ScoredLabel> ranked);

    const std::vector<ScoredLabel>* find(const std::string& cve_id) const;
    const std::map<std::string, std::vector<ScoredLabel>>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }

private:
    std::map<std::string, std::vector<ScoredLabel>> entries_;
};

using GoldLabels = std::map<std::string, CweId>;

inline constexpr std::size_t kMaxRankedEntries = 10;

// predictions-jsonl: {"cve_id": str, "ranked": [{"cwe": str, "score": float}, ...]}
// with 1..10 entries in descending score order.
PredictionSet parse_predictions_jsonl(std::string_view source);
std::string export_predictions_jsonl(const PredictionSet& predictions);
void append_prediction_line(std::string& out, const std::string& cve_id, const std::vector<ScoredLabel>& ranked);

// gold-jsonl: {"cve_id": str, "label": str}. Also accepts split files, which
// carry extra fields.
GoldLabels parse_gold_jsonl(std::string_view source);

// Thrown when gold ids have no prediction; ids() lists them all.
class MissingPredictionsError : public ValidationError {
public:
    explicit MissingPredictionsError(std::vector<std::string> ids);
    const std::vector<std::string>& ids() const noexcept { return ids_; }

private:
    std::vector<std::string> ids_;
};

struct StrictResult {
    std::size_t correct = 0;
    std::size_t n = 0;
    double acc = 0.0;
};

StrictResult strict_accuracy(const PredictionSet& p, const GoldLabels& g);

// Lists shorter than k are used as they are.
double topk_accuracy(const PredictionSet& p, const GoldLabels& g, std::size_t k);

struct ClassF1 {
    CweId cwe;
    std::size_t support = 0;
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct F1Result {
    std::vector<ClassF1> rows;  // one per class present in gold, ordered by CweId
    double macro_f1 = 0.0;
    double weighted_f1 = 0.0;
};

// Rank-1 predictions only. Undefined ratios are 0. Rows and averages cover
// the classes that appear in gold; a prediction of a class absent from gold
// is still a miss for the gold class but yields no row of its own.
F1Result f1_scores(const PredictionSet& p, const GoldLabels& g);

struct Band {
    std::size_t classes = 0;
    std::size_t samples = 0;  // summed support
};

struct F1Bands {
    double low_threshold = 0.3;
    double high_threshold = 0.8;
    Band high;  // f1 >= high_threshold
    Band mid;   // low_threshold <= f1 < high_threshold
    Band low;   // f1 < low_threshold
};

F1Bands f1_band_breakdown(const std::vector<ClassF1>& rows, double low_threshold = 0.3, double high_threshold = 0.8);

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

// Exact (Clopper-Pearson) two-sided interval for a binomial proportion at
// level 1 - alpha. Each endpoint is found by bisection on the binomial tail,
// summed in log space, to an absolute tolerance of 1e-12.
Interval clopper_pearson(std::size_t successes, std::size_t n, double alpha);

// Round-half-away to `places` decimals; used when rendering intervals.
Interval round_interval(const Interval& ci, int places);

struct HierarchyResult {
    std::size_t n = 0;
    std::size_t strict_correct = 0;
    std::size_t rescued = 0;
    std::vector<std::string> rescued_ids;  // sorted by cve_id
    double hier_acc = 0.0;
};

// A sample is rescued when its rank-1 label misses gold but is hierarchy
// equivalent to it at `depth`.
HierarchyResult hierarchy_aware_accuracy(const PredictionSet& p, const GoldLabels& g, const CweTaxonomy& t, int depth);

struct ClassAccuracy {
    CweId cwe;
    std::size_t support = 0;
    std::size_t correct = 0;
    double accuracy = 0.0;
};

// Sorted by support descending, ties by CweId.
std::vector<ClassAccuracy> per_class_report(const PredictionSet& p, const GoldLabels& g);

struct EvalOptions {
    std::vector<std::size_t> ks{1, 3};
    double alpha = 0.05;
    int depth = 1;
    double band_low = 0.3;
    double band_high = 0.8;
};

struct PerClassRow {
    CweId cwe;
    std::size_t support = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;
};

struct EvalReport {
    std::size_t n = 0;
    std::size_t strict_correct = 0;
    double strict_acc = 0.0;
    std::map<std::size_t, double> topk_acc;
    double macro_f1 = 0.0;
    double weighted_f1 = 0.0;
    std::vector<PerClassRow> per_class;  // per_class_report ordering
    double alpha = 0.05;
    Interval ci;
    int depth = 1;
    std::size_t rescued = 0;
    double hier_acc = 0.0;
    std::vector<std::string> rescued_ids;
    F1Bands bands;
};

EvalReport evaluate(const PredictionSet& p, const GoldLabels& g, const CweTaxonomy& t, const EvalOptions& options = {});

inline constexpr std::string_view kReportSchema = "cvecwe-eval-report/1";

// JSON with every EvalReport field. Reals are written with 6 significant
// digits, so report_to_json(report_from_json(j)) == j.
std::string report_to_json(const EvalReport& r);
EvalReport report_from_json(std::string_view json_text);

// Plain-text rendering: headline metrics, CI, supplementary hierarchy view,
// F1 bands, and the top `per_class_rows` classes by support.
std::string render_report_table(const EvalReport& r, std::size_t per_class_rows = 10);

}  // namespace cvecwe
