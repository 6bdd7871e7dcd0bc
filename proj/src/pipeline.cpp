// SPDX-License-Identifier: Apache-2.0

#include "cvecwe/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "cvecwe/errors.hpp"
#include "cvecwe/hashing.hpp"
#include "cvecwe/text_util.hpp"

namespace cvecwe {

using nlohmann::json;

std::string_view to_string(Agreement a) {
    switch (a) {
        case Agreement::Exact: return "exact";
        case Agreement::HierarchyOnly: return "hierarchy_only";
        case Agreement::Disagree: return "disagree";
        case Agreement::NvdOnly: return "nvd_only";
        case Agreement::AiOnly: return "ai_only";
        case Agreement::Unlabeled: return "unlabeled";
    }
    return "unknown";
}

std::vector<AiLabel> parse_ai_labels(std::string_view source) {
    std::vector<AiLabel> labels;
    for (const auto& line : text::split_lines(source)) {
        if (text::trim(line.text).empty()) continue;
        json obj;
        try {
            obj = json::parse(line.text.begin(), line.text.end());
        } catch (const json::parse_error& e) {
            throw ParseError(std::string("malformed JSON: ") + e.what(), line.number,
                             line.offset + (e.byte > 0 ? e.byte - 1 : 0));
        }
        if (!obj.is_object() || !obj.contains("cve_id") || !obj["cve_id"].is_string() || !obj.contains("ai_cwe") ||
            !obj["ai_cwe"].is_string()) {
            throw ParseError("AI label line needs string fields cve_id and ai_cwe", line.number, line.offset);
        }
        const auto token = obj["ai_cwe"].get<std::string>();
        const auto id = CweId::parse(token);
        if (!id) throw ParseError("malformed CWE id token '" + token + "'", line.number, line.offset);
        labels.push_back({obj["cve_id"].get<std::string>(), *id});
    }
    return labels;
}

std::vector<MergedRecord> merge_labels(const std::vector<CveRecord>& records, const std::vector<AiLabel>& ai,
                                       const CweTaxonomy& taxonomy, int depth) {
    if (depth < 1) throw ValidationError("equivalence depth must be >= 1");
    std::unordered_map<std::string, CweId> by_id;
    by_id.reserve(ai.size());
    for (const auto& label : ai) {
        if (!by_id.emplace(label.cve_id, label.ai_cwe).second) {
            throw ValidationError("duplicate AI label for " + label.cve_id);
        }
    }

    std::vector<MergedRecord> merged;
    merged.reserve(records.size());
    for (const auto& rec : records) {
        MergedRecord m{rec, std::nullopt, Agreement::Unlabeled};
        if (auto it = by_id.find(rec.cve_id); it != by_id.end()) m.ai_cwe = it->second;

        if (rec.nvd_cwe && m.ai_cwe) {
            if (*rec.nvd_cwe == *m.ai_cwe) m.agreement = Agreement::Exact;
            else if (is_hierarchy_equivalent(taxonomy, *m.ai_cwe, *rec.nvd_cwe, depth)) m.agreement = Agreement::HierarchyOnly;
            else m.agreement = Agreement::Disagree;
        } else if (rec.nvd_cwe) {
            m.agreement = Agreement::NvdOnly;
        } else if (m.ai_cwe) {
            m.agreement = Agreement::AiOnly;
        }
        merged.push_back(std::move(m));
    }
    return merged;
}

double round_to(double value, int places) {
    const double scale = std::pow(10.0, places);
    return std::round(value * scale) / scale;
}

AgreementStats agreement_stats(const std::vector<MergedRecord>& merged) {
    AgreementStats stats;
    stats.n_total = merged.size();
    for (Agreement a : kAllAgreements) stats.counts[a] = 0;
    for (const auto& m : merged) ++stats.counts[m.agreement];
    const std::size_t exact = stats.counts[Agreement::Exact];
    const std::size_t hier = stats.counts[Agreement::HierarchyOnly];
    stats.n_both = exact + hier + stats.counts[Agreement::Disagree];
    if (stats.n_both > 0) {
        const auto n = static_cast<double>(stats.n_both);
        stats.exact_rate = static_cast<double>(exact) / n;
        stats.hierarchy_rate = static_cast<double>(exact + hier) / n;
    }
    return stats;
}

namespace {

std::string normalize_cve_token(std::string_view id) {
    std::string out(text::trim(id));
    for (char& c : out) {
        if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    }
    return out;
}

}  // namespace

DecontaminationResult decontaminate(const std::vector<MergedRecord>& merged, const std::vector<std::string>& banned_ids) {
    std::unordered_set<std::string> banned;
    for (const auto& id : banned_ids) {
        auto norm = normalize_cve_token(id);
        if (!norm.empty()) banned.insert(std::move(norm));
    }

    DecontaminationResult result;
    std::unordered_set<std::string> hit;
    for (const auto& m : merged) {
        auto norm = normalize_cve_token(m.record.cve_id);
        if (banned.count(norm)) {
            result.removed.push_back(m);
            hit.insert(std::move(norm));
        } else {
            result.clean.push_back(m);
        }
    }
    std::unordered_set<std::string> reported;
    for (const auto& id : banned_ids) {
        auto norm = normalize_cve_token(id);
        if (norm.empty() || hit.count(norm) || !reported.insert(norm).second) continue;
        result.not_found.emplace_back(text::trim(id));
    }
    return result;
}

std::vector<std::string> parse_banned_ids(std::string_view source) {
    std::vector<std::string> ids;
    for (const auto& line : text::split_lines(source)) {
        auto row = line.text;
        if (auto hash = row.find('#'); hash != std::string_view::npos) row = row.substr(0, hash);
        row = text::trim(row);
        if (!row.empty()) ids.emplace_back(row);
    }
    return ids;
}

void SplitConfig::validate() const {
    if (vocabulary.empty()) throw ValidationError("split vocabulary is empty");
    if (!(eval_fraction >= 0.0 && eval_fraction <= 1.0)) throw ValidationError("eval_fraction must lie in [0, 1]");
    if (!(val_share >= 0.0 && val_share <= 1.0)) throw ValidationError("val_share must lie in [0, 1]");
    if (equivalence_depth < 1) throw ValidationError("equivalence_depth must be >= 1");
}

SplitName assign_exact_record(std::uint64_t seed, std::string_view cve_id, double eval_fraction, double val_share) {
    const double u = hash_to_unit(keyed_hash(seed, cve_id));
    if (u < eval_fraction * val_share) return SplitName::Val;
    if (u < eval_fraction) return SplitName::Test;
    return SplitName::Train;
}

SplitAssignment build_splits(const std::vector<MergedRecord>& merged, const SplitConfig& cfg) {
    cfg.validate();
    const std::set<CweId> vocab(cfg.vocabulary.begin(), cfg.vocabulary.end());

    SplitAssignment out;
    for (const auto& m : merged) {
        const auto& id = m.record.cve_id;
        if (!m.ai_cwe) {
            out.excluded.push_back({id, m.record.nvd_cwe ? "nvd_only: no AI label" : "unlabeled"});
            continue;
        }
        if (!vocab.count(*m.ai_cwe)) {
            out.excluded.push_back({id, "label " + m.ai_cwe->str() + " outside vocabulary"});
            continue;
        }
        SplitEntry entry{id, *m.ai_cwe, m.record.description};
        if (m.agreement != Agreement::Exact) {
            out.train.push_back(std::move(entry));
            continue;
        }
        switch (assign_exact_record(cfg.seed, id, cfg.eval_fraction, cfg.val_share)) {
            case SplitName::Val: out.val.push_back(std::move(entry)); break;
            case SplitName::Test: out.test.push_back(std::move(entry)); break;
            case SplitName::Train: out.train.push_back(std::move(entry)); break;
        }
    }

    const auto by_id = [](const auto& a, const auto& b) { return cve_id_less(a.cve_id, b.cve_id); };
    std::stable_sort(out.train.begin(), out.train.end(), by_id);
    std::stable_sort(out.val.begin(), out.val.end(), by_id);
    std::stable_sort(out.test.begin(), out.test.end(), by_id);
    std::stable_sort(out.excluded.begin(), out.excluded.end(), by_id);
    return out;
}

std::string export_split_jsonl(const std::vector<SplitEntry>& entries) {
    std::string out;
    for (const auto& e : entries) {
        nlohmann::ordered_json obj;
        obj["cve_id"] = e.cve_id;
        obj["description"] = e.description;
        obj["label"] = e.label.str();
        out += obj.dump(-1, ' ', false, json::error_handler_t::replace);
        out += '\n';
    }
    return out;
}

std::vector<SplitEntry> parse_split_jsonl(std::string_view source) {
    std::vector<SplitEntry> entries;
    for (const auto& line : text::split_lines(source)) {
        if (text::trim(line.text).empty()) continue;
        json obj;
        try {
            obj = json::parse(line.text.begin(), line.text.end());
        } catch (const json::parse_error& e) {
            throw ParseError(std::string("malformed JSON: ") + e.what(), line.number,
                             line.offset + (e.byte > 0 ? e.byte - 1 : 0));
        }
        const auto is_str = [&](const char* k) { return obj.is_object() && obj.contains(k) && obj[k].is_string(); };
        if (!is_str("cve_id") || !is_str("description") || !is_str("label")) {
            throw ParseError("split line needs string fields cve_id, description and label", line.number, line.offset);
        }
        const auto token = obj["label"].get<std::string>();
        const auto id = CweId::parse(token);
        if (!id) throw ParseError("malformed CWE id token '" + token + "'", line.number, line.offset);
        entries.push_back({obj["cve_id"].get<std::string>(), *id, obj["description"].get<std::string>()});
    }
    return entries;
}

std::vector<WorksheetRow> sample_disagreements(const std::vector<MergedRecord>& merged, std::size_t n,
                                               std::uint64_t seed) {
    std::vector<const MergedRecord*> pool;
    for (const auto& m : merged) {
        if (m.agreement == Agreement::Disagree) pool.push_back(&m);
    }
    if (n > pool.size()) {
        throw ValidationError("requested " + std::to_string(n) + " disagreement samples but only " +
                              std::to_string(pool.size()) + " are available");
    }
    std::stable_sort(pool.begin(), pool.end(),
                     [](const MergedRecord* a, const MergedRecord* b) { return cve_id_less(a->record.cve_id, b->record.cve_id); });

    // Partial Fisher-Yates: position i takes a uniform pick from [i, size).
    SplitMixRng rng(seed);
    std::vector<WorksheetRow> rows;
    rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
        std::swap(pool[i], pool[j]);
        const MergedRecord& m = *pool[i];
        rows.push_back({m.record.cve_id, m.record.description, *m.record.nvd_cwe, *m.ai_cwe});
    }
    return rows;
}

std::string export_worksheet_csv(const std::vector<WorksheetRow>& rows) {
    std::string out = "cve_id,description,nvd_cwe,ai_cwe,verdict\n";
    for (const auto& r : rows) {
        out += text::csv_escape(r.cve_id) + "," + text::csv_escape(r.description) + "," + r.nvd_cwe.str() + "," +
               r.ai_cwe.str() + ",\n";
    }
    return out;
}

}  // namespace cvecwe
