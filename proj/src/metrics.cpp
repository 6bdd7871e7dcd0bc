// SPDX-License-Identifier: Apache-2.0

#include "cvecwe/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <set>

#include "cvecwe/text_util.hpp"

namespace cvecwe {

using nlohmann::json;

void PredictionSet::add(std::string cve_id, std::vector<ScoredLabel> ranked) {
    if (ranked.empty()) throw ValidationError("empty ranked list for " + cve_id);
    std::set<CweId> seen;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        if (!std::isfinite(ranked[i].score)) throw ValidationError("non-finite score for " + cve_id);
        if (!seen.insert(ranked[i].cwe).second) throw ValidationError("duplicate CWE " + ranked[i].cwe.str() + " for " + cve_id);
        if (i == 0) continue;
        const auto& prev = ranked[i - 1];
        if (ranked[i].score > prev.score || (ranked[i].score == prev.score && ranked[i].cwe < prev.cwe)) {
            throw ValidationError("ranked list for " + cve_id + " is not in descending score order");
        }
    }
    if (!entries_.emplace(std::move(cve_id), std::move(ranked)).second) {
        throw ValidationError("duplicate prediction entry");
    }
}

const std::vector<ScoredLabel>* PredictionSet::find(const std::string& cve_id) const {
    auto it = entries_.find(cve_id);
    return it == entries_.end() ? nullptr : &it->second;
}

namespace {

json parse_line(const text::Line& line) {
    try {
        return json::parse(line.text.begin(), line.text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what(), line.number, line.offset + (e.byte > 0 ? e.byte - 1 : 0));
    }
}

}  // namespace

PredictionSet parse_predictions_jsonl(std::string_view source) {
    PredictionSet set;
    for (const auto& line : text::split_lines(source)) {
        if (text::trim(line.text).empty()) continue;
        const json obj = parse_line(line);
        const auto fail = [&](const std::string& what) -> ParseError { return ParseError(what, line.number, line.offset); };
        if (!obj.is_object() || !obj.contains("cve_id") || !obj["cve_id"].is_string()) throw fail("prediction line needs a string cve_id");
        if (!obj.contains("ranked") || !obj["ranked"].is_array()) throw fail("prediction line needs a ranked array");
        const auto& ranked = obj["ranked"];
        if (ranked.empty() || ranked.size() > kMaxRankedEntries) throw fail("ranked list must hold 1 to 10 entries");
        std::vector<ScoredLabel> labels;
        for (const auto& item : ranked) {
            if (!item.is_object() || !item.contains("cwe") || !item["cwe"].is_string() || !item.contains("score") ||
                !item["score"].is_number()) {
                throw fail("ranked entries need a string cwe and a numeric score");
            }
            const auto token = item["cwe"].get<std::string>();
            const auto id = CweId::parse(token);
            if (!id) throw fail("malformed CWE id token '" + token + "'");
            labels.push_back({*id, item["score"].get<double>()});
        }
        try {
            set.add(obj["cve_id"].get<std::string>(), std::move(labels));
        } catch (const ValidationError& e) {
            throw fail(e.what());
        }
    }
    return set;
}

void append_prediction_line(std::string& out, const std::string& cve_id, const std::vector<ScoredLabel>& ranked) {
    nlohmann::ordered_json obj;
    obj["cve_id"] = cve_id;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : ranked) {
        nlohmann::ordered_json item;
        item["cwe"] = r.cwe.str();
        item["score"] = r.score;
        arr.push_back(std::move(item));
    }
    obj["ranked"] = std::move(arr);
    out += obj.dump();
    out += '\n';
}

std::string export_predictions_jsonl(const PredictionSet& predictions) {
    std::string out;
    for (const auto& [id, ranked] : predictions.entries()) append_prediction_line(out, id, ranked);
    return out;
}

GoldLabels parse_gold_jsonl(std::string_view source) {
    GoldLabels gold;
    for (const auto& line : text::split_lines(source)) {
        if (text::trim(line.text).empty()) continue;
        const json obj = parse_line(line);
        if (!obj.is_object() || !obj.contains("cve_id") || !obj["cve_id"].is_string() || !obj.contains("label") ||
            !obj["label"].is_string()) {
            throw ParseError("gold line needs string fields cve_id and label", line.number, line.offset);
        }
        const auto token = obj["label"].get<std::string>();
        const auto id = CweId::parse(token);
        if (!id) throw ParseError("malformed CWE id token '" + token + "'", line.number, line.offset);
        if (!gold.emplace(obj["cve_id"].get<std::string>(), *id).second) {
            throw ParseError("duplicate gold label", line.number, line.offset);
        }
    }
    return gold;
}

MissingPredictionsError::MissingPredictionsError(std::vector<std::string> ids)
    : ValidationError([&] {
          std::string msg = "missing predictions for " + std::to_string(ids.size()) + " gold id(s):";
          for (const auto& id : ids) msg += " " + id;
          return msg;
      }()),
      ids_(std::move(ids)) {}

namespace {

// Rank lists aligned with gold order; throws if any is missing.
std::vector<const std::vector<ScoredLabel>*> align(const PredictionSet& p, const GoldLabels& g) {
    if (g.empty()) throw ValidationError("gold label set is empty");
    std::vector<const std::vector<ScoredLabel>*> out;
    std::vector<std::string> missing;
    out.reserve(g.size());
    for (const auto& [id, _] : g) {
        const auto* ranked = p.find(id);
        if (!ranked) missing.push_back(id);
        out.push_back(ranked);
    }
    if (!missing.empty()) throw MissingPredictionsError(std::move(missing));
    return out;
}

}  // namespace

StrictResult strict_accuracy(const PredictionSet& p, const GoldLabels& g) {
    const auto ranked = align(p, g);
    StrictResult r;
    r.n = g.size();
    std::size_t i = 0;
    for (const auto& [_, gold] : g) {
        if (ranked[i++]->front().cwe == gold) ++r.correct;
    }
    r.acc = static_cast<double>(r.correct) / static_cast<double>(r.n);
    return r;
}

double topk_accuracy(const PredictionSet& p, const GoldLabels& g, std::size_t k) {
    if (k == 0) throw ValidationError("k must be >= 1");
    const auto ranked = align(p, g);
    std::size_t hits = 0;
    std::size_t i = 0;
    for (const auto& [_, gold] : g) {
        const auto& list = *ranked[i++];
        const auto end = list.begin() + static_cast<std::ptrdiff_t>(std::min(k, list.size()));
        if (std::any_of(list.begin(), end, [&](const ScoredLabel& s) { return s.cwe == gold; })) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(g.size());
}

namespace {

double safe_ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

F1Result f1_scores(const PredictionSet& p, const GoldLabels& g) {
    const auto ranked = align(p, g);
    std::map<CweId, ClassF1> classes;
    for (const auto& [_, gold] : g) classes[gold].cwe = gold;

    std::size_t i = 0;
    for (const auto& [_, gold] : g) {
        const CweId pred = ranked[i++]->front().cwe;
        ++classes[gold].support;
        if (pred == gold) {
            ++classes[gold].tp;
        } else {
            ++classes[gold].fn;
            if (auto it = classes.find(pred); it != classes.end()) ++it->second.fp;
        }
    }

    F1Result result;
    double macro = 0.0;
    double weighted = 0.0;
    for (auto& [_, row] : classes) {
        row.precision = safe_ratio(row.tp, row.tp + row.fp);
        row.recall = safe_ratio(row.tp, row.tp + row.fn);
        const double denom = row.precision + row.recall;
        row.f1 = denom == 0.0 ? 0.0 : 2.0 * row.precision * row.recall / denom;
        macro += row.f1;
        weighted += row.f1 * static_cast<double>(row.support);
        result.rows.push_back(row);
    }
    result.macro_f1 = macro / static_cast<double>(result.rows.size());
    result.weighted_f1 = weighted / static_cast<double>(g.size());
    return result;
}

F1Bands f1_band_breakdown(const std::vector<ClassF1>& rows, double low_threshold, double high_threshold) {
    if (!(low_threshold <= high_threshold)) throw ValidationError("band thresholds out of order");
    F1Bands bands;
    bands.low_threshold = low_threshold;
    bands.high_threshold = high_threshold;
    for (const auto& row : rows) {
        Band& b = row.f1 >= high_threshold ? bands.high : (row.f1 >= low_threshold ? bands.mid : bands.low);
        ++b.classes;
        b.samples += row.support;
    }
    return bands;
}

namespace {

double log_add(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// log P[X in [from, to]] for X ~ Bin(n, p), 0 < p < 1.
double log_binomial_range(std::size_t n, std::size_t from, std::size_t to, double p) {
    const double lp = std::log(p);
    const double lq = std::log1p(-p);
    const double lnf = std::lgamma(static_cast<double>(n) + 1.0);
    double acc = -std::numeric_limits<double>::infinity();
    for (std::size_t i = from; i <= to; ++i) {
        const double di = static_cast<double>(i);
        const double term = lnf - std::lgamma(di + 1.0) - std::lgamma(static_cast<double>(n - i) + 1.0) + di * lp +
                            static_cast<double>(n - i) * lq;
        acc = log_add(acc, term);
    }
    return acc;
}

// Finds p in (0, 1) with f(p) = target where f is monotone in the direction
// given by `increasing`.
template <typename F>
double bisect(F&& f, double target, bool increasing) {
    constexpr double kTolerance = 1e-12;
    double lo = 0.0;
    double hi = 1.0;
    while (hi - lo > kTolerance) {
        const double mid = 0.5 * (lo + hi);
        const bool above = f(mid) > target;
        if (above == increasing) hi = mid;
        else lo = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

Interval clopper_pearson(std::size_t successes, std::size_t n, double alpha) {
    if (n == 0) throw ValidationError("clopper_pearson needs n >= 1");
    if (successes > n) throw ValidationError("clopper_pearson needs successes <= n");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("clopper_pearson needs 0 < alpha < 1");

    const double log_target = std::log(alpha / 2.0);
    Interval ci;
    if (successes == 0) {
        ci.lo = 0.0;
    } else {
        // P[X >= k] grows with p.
        ci.lo = bisect([&](double p) { return log_binomial_range(n, successes, n, p); }, log_target, true);
    }
    if (successes == n) {
        ci.hi = 1.0;
    } else {
        // P[X <= k] shrinks as p grows.
        ci.hi = bisect([&](double p) { return log_binomial_range(n, 0, successes, p); }, log_target, false);
    }
    return ci;
}

Interval round_interval(const Interval& ci, int places) {
    const double scale = std::pow(10.0, places);
    return {std::round(ci.lo * scale) / scale, std::round(ci.hi * scale) / scale};
}

HierarchyResult hierarchy_aware_accuracy(const PredictionSet& p, const GoldLabels& g, const CweTaxonomy& t, int depth) {
    if (depth < 1) throw ValidationError("depth must be >= 1");
    const auto ranked = align(p, g);
    HierarchyResult r;
    r.n = g.size();
    std::size_t i = 0;
    for (const auto& [id, gold] : g) {
        const CweId pred = ranked[i++]->front().cwe;
        if (pred == gold) {
            ++r.strict_correct;
        } else if (is_hierarchy_equivalent(t, pred, gold, depth)) {
            ++r.rescued;
            r.rescued_ids.push_back(id);
        }
    }
    std::stable_sort(r.rescued_ids.begin(), r.rescued_ids.end(),
                     [](const std::string& a, const std::string& b) { return a < b; });
    r.hier_acc = static_cast<double>(r.strict_correct + r.rescued) / static_cast<double>(r.n);
    return r;
}

std::vector<ClassAccuracy> per_class_report(const PredictionSet& p, const GoldLabels& g) {
    const auto ranked = align(p, g);
    std::map<CweId, ClassAccuracy> classes;
    std::size_t i = 0;
    for (const auto& [_, gold] : g) {
        auto& row = classes[gold];
        row.cwe = gold;
        ++row.support;
        if (ranked[i++]->front().cwe == gold) ++row.correct;
    }
    std::vector<ClassAccuracy> rows;
    rows.reserve(classes.size());
    for (auto& [_, row] : classes) {
        row.accuracy = static_cast<double>(row.correct) / static_cast<double>(row.support);
        rows.push_back(row);
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const ClassAccuracy& a, const ClassAccuracy& b) { return a.support > b.support; });
    return rows;
}

EvalReport evaluate(const PredictionSet& p, const GoldLabels& g, const CweTaxonomy& t, const EvalOptions& options) {
    const EvalOptions defaults;
    const auto& ks = options.ks.empty() ? defaults.ks : options.ks;

    EvalReport r;
    const auto strict = strict_accuracy(p, g);
    r.n = strict.n;
    r.strict_correct = strict.correct;
    r.strict_acc = strict.acc;
    for (std::size_t k : ks) r.topk_acc[k] = topk_accuracy(p, g, k);

    const auto f1 = f1_scores(p, g);
    r.macro_f1 = f1.macro_f1;
    r.weighted_f1 = f1.weighted_f1;
    r.bands = f1_band_breakdown(f1.rows, options.band_low, options.band_high);

    std::map<CweId, const ClassF1*> f1_by_class;
    for (const auto& row : f1.rows) f1_by_class[row.cwe] = &row;
    for (const auto& acc : per_class_report(p, g)) {
        const ClassF1& row = *f1_by_class.at(acc.cwe);
        r.per_class.push_back({acc.cwe, acc.support, row.precision, row.recall, row.f1, acc.accuracy});
    }

    r.alpha = options.alpha;
    r.ci = clopper_pearson(strict.correct, strict.n, options.alpha);

    const auto hier = hierarchy_aware_accuracy(p, g, t, options.depth);
    r.depth = options.depth;
    r.rescued = hier.rescued;
    r.hier_acc = hier.hier_acc;
    r.rescued_ids = hier.rescued_ids;
    return r;
}

namespace {

double sig6(double v) { return std::stod(text::format_sig6(v)); }

}  // namespace

std::string report_to_json(const EvalReport& r) {
    nlohmann::ordered_json j;
    j["schema"] = kReportSchema;
    j["n"] = r.n;
    j["strict_correct"] = r.strict_correct;
    j["strict_acc"] = sig6(r.strict_acc);
    nlohmann::ordered_json topk = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.topk_acc) topk[std::to_string(k)] = sig6(v);
    j["topk_acc"] = std::move(topk);
    j["macro_f1"] = sig6(r.macro_f1);
    j["weighted_f1"] = sig6(r.weighted_f1);
    j["f1_averaging"] = "classes_present_in_gold";
    j["ci"] = {{"method", "clopper-pearson"}, {"alpha", sig6(r.alpha)}, {"lo", sig6(r.ci.lo)}, {"hi", sig6(r.ci.hi)}};
    j["hierarchy"] = {{"supplementary", true},
                      {"note", "hierarchy-aware scores are not directly comparable to strict scores"},
                      {"depth", r.depth},
                      {"rescued", r.rescued},
                      {"hier_acc", sig6(r.hier_acc)},
                      {"rescued_ids", r.rescued_ids}};
    const auto band = [](const Band& b) { return nlohmann::ordered_json{{"classes", b.classes}, {"samples", b.samples}}; };
    j["bands"] = {{"low_threshold", sig6(r.bands.low_threshold)},
                  {"high_threshold", sig6(r.bands.high_threshold)},
                  {"high", band(r.bands.high)},
                  {"mid", band(r.bands.mid)},
                  {"low", band(r.bands.low)}};
    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : r.per_class) {
        rows.push_back(nlohmann::ordered_json{{"cwe", row.cwe.str()},
                                              {"support", row.support},
                                              {"precision", sig6(row.precision)},
                                              {"recall", sig6(row.recall)},
                                              {"f1", sig6(row.f1)},
                                              {"accuracy", sig6(row.accuracy)}});
    }
    j["per_class"] = std::move(rows);
    return j.dump(2) + "\n";
}

EvalReport report_from_json(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text.begin(), json_text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed report JSON: ") + e.what(), 0, e.byte);
    }
    try {
        if (j.at("schema").get<std::string>() != kReportSchema) throw ValidationError("unsupported report schema");
        EvalReport r;
        r.n = j.at("n").get<std::size_t>();
        r.strict_correct = j.at("strict_correct").get<std::size_t>();
        r.strict_acc = j.at("strict_acc").get<double>();
        for (const auto& [k, v] : j.at("topk_acc").items()) r.topk_acc[std::stoul(k)] = v.get<double>();
        r.macro_f1 = j.at("macro_f1").get<double>();
        r.weighted_f1 = j.at("weighted_f1").get<double>();
        r.alpha = j.at("ci").at("alpha").get<double>();
        r.ci = {j.at("ci").at("lo").get<double>(), j.at("ci").at("hi").get<double>()};
        const auto& h = j.at("hierarchy");
        r.depth = h.at("depth").get<int>();
        r.rescued = h.at("rescued").get<std::size_t>();
        r.hier_acc = h.at("hier_acc").get<double>();
        r.rescued_ids = h.at("rescued_ids").get<std::vector<std::string>>();
        const auto& b = j.at("bands");
        r.bands.low_threshold = b.at("low_threshold").get<double>();
        r.bands.high_threshold = b.at("high_threshold").get<double>();
        const auto band = [](const json& x) { return Band{x.at("classes").get<std::size_t>(), x.at("samples").get<std::size_t>()}; };
        r.bands.high = band(b.at("high"));
        r.bands.mid = band(b.at("mid"));
        r.bands.low = band(b.at("low"));
        for (const auto& row : j.at("per_class")) {
            r.per_class.push_back({CweId::from_string(row.at("cwe").get<std::string>()), row.at("support").get<std::size_t>(),
                                   row.at("precision").get<double>(), row.at("recall").get<double>(),
                                   row.at("f1").get<double>(), row.at("accuracy").get<double>()});
        }
        return r;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("report JSON does not match schema: ") + e.what());
    }
}

namespace {

std::string percent(double v, int decimals = 1) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f%%", decimals, 100.0 * v);
    return buf;
}

std::string fixed(double v, int decimals) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

}  // namespace

std::string render_report_table(const EvalReport& r, std::size_t per_class_rows) {
    const Interval shown = round_interval(r.ci, 3);
    std::string out;
    out += "samples            " + std::to_string(r.n) + "\n";
    out += "strict accuracy    " + percent(r.strict_acc) + " (" + std::to_string(r.strict_correct) + "/" +
           std::to_string(r.n) + ")\n";
    out += "  " + fixed(100.0 * (1.0 - r.alpha), 0) + "% Clopper-Pearson " + percent(shown.lo) + " - " + percent(shown.hi) + "\n";
    for (const auto& [k, v] : r.topk_acc) out += "top-" + std::to_string(k) + " accuracy     " + percent(v) + "\n";
    out += "macro F1           " + fixed(r.macro_f1, 3) + "\n";
    out += "weighted F1        " + fixed(r.weighted_f1, 3) + "\n";
    out += "\nsupplementary, not comparable to strict scores:\n";
    const double delta_pp = 100.0 * (r.hier_acc - r.strict_acc);
    out += "hierarchy-aware    " + percent(r.hier_acc) + " (+" + fixed(delta_pp, 1) + "pp, depth " +
           std::to_string(r.depth) + ", " + std::to_string(r.rescued) + " rescued)\n";
    out += "\nF1 bands\n";
    out += "  f1 >= " + fixed(r.bands.high_threshold, 2) + "         " + std::to_string(r.bands.high.classes) + " classes, " +
           std::to_string(r.bands.high.samples) + " samples\n";
    out += "  " + fixed(r.bands.low_threshold, 2) + " <= f1 < " + fixed(r.bands.high_threshold, 2) + "  " +
           std::to_string(r.bands.mid.classes) + " classes, " + std::to_string(r.bands.mid.samples) + " samples\n";
    out += "  f1 < " + fixed(r.bands.low_threshold, 2) + "          " + std::to_string(r.bands.low.classes) + " classes, " +
           std::to_string(r.bands.low.samples) + " samples\n";
    out += "\nper class (by support)\n";
    out += "  cwe        support  accuracy  precision  recall  f1\n";
    for (std::size_t i = 0; i < std::min(per_class_rows, r.per_class.size()); ++i) {
        const auto& row = r.per_class[i];
        char buf[160];
        std::snprintf(buf, sizeof buf, "  %-10s %7zu  %8s  %9s  %6s  %5s\n", row.cwe.str().c_str(), row.support,
                      percent(row.accuracy).c_str(), fixed(row.precision, 3).c_str(), fixed(row.recall, 3).c_str(),
                      fixed(row.f1, 3).c_str());
        out += buf;
    }
    return out;
}

}  // namespace cvecwe
