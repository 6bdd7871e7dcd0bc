// SPDX-License-Identifier: Apache-2.0

#include "cvecwe/corpus.hpp"

#include <algorithm>
#include <map>
#include <nlohmann/json.hpp>
#include <set>

#include "cvecwe/errors.hpp"
#include "cvecwe/text_util.hpp"

namespace cvecwe {

using nlohmann::json;

std::optional<CveKey> CveKey::parse(std::string_view id) {
    constexpr std::string_view prefix = "CVE-";
    if (id.substr(0, prefix.size()) != prefix) return std::nullopt;
    id.remove_prefix(prefix.size());
    if (id.size() < 4 + 1 + 4 || id[4] != '-') return std::nullopt;
    CveKey key;
    for (char c : id.substr(0, 4)) {
        if (c < '0' || c > '9') return std::nullopt;
        key.year = key.year * 10 + (c - '0');
    }
    const auto seq = id.substr(5);
    if (seq.size() > 19) return std::nullopt;
    for (char c : seq) {
        if (c < '0' || c > '9') return std::nullopt;
        key.sequence = key.sequence * 10 + static_cast<std::uint64_t>(c - '0');
    }
    return key;
}

bool is_valid_cve_id(std::string_view cve_id) { return CveKey::parse(cve_id).has_value(); }

bool cve_id_less(std::string_view a, std::string_view b) {
    const auto ka = CveKey::parse(a);
    const auto kb = CveKey::parse(b);
    if (ka && kb) {
        if (*ka != *kb) return *ka < *kb;
        return a < b;  // "CVE-2020-0001" vs "CVE-2020-00001"
    }
    if (ka.has_value() != kb.has_value()) return ka.has_value();
    return a < b;
}

FeedFormat feed_format_from_string(std::string_view name) {
    if (name == "nvd-json-2" || name == "nvd") return FeedFormat::NvdJson2;
    if (name == "record-jsonl" || name == "jsonl") return FeedFormat::RecordJsonl;
    throw ValidationError("unknown feed format: " + std::string(name));
}

std::size_t utf8_length(std::string_view s) {
    std::size_t n = 0;
    for (char c : s) {
        if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
    }
    return n;
}

namespace {

[[noreturn]] void rethrow_json_error(const json::parse_error& e, std::string_view source, std::size_t base_offset,
                                     std::size_t line_hint) {
    // nlohmann reports a 1-based byte position of the failing character.
    const std::size_t local = e.byte > 0 ? e.byte - 1 : 0;
    const std::size_t offset = base_offset + local;
    std::size_t line = line_hint;
    if (line == 0) {
        const auto upto = std::min(offset, source.size());
        line = 1 + static_cast<std::size_t>(std::count(source.begin(), source.begin() + static_cast<std::ptrdiff_t>(upto), '\n'));
    }
    throw ParseError(std::string("malformed JSON: ") + e.what(), line, offset);
}

const json* member(const json& obj, const char* key) {
    if (!obj.is_object()) return nullptr;
    auto it = obj.find(key);
    return it == obj.end() || it->is_null() ? nullptr : &*it;
}

std::optional<std::string> string_member(const json& obj, const char* key) {
    const json* v = member(obj, key);
    if (!v || !v->is_string()) return std::nullopt;
    return v->get<std::string>();
}

// Primary weaknesses are considered before Secondary ones; within a group the
// first value matching CWE-<digits> wins.
std::optional<CweId> select_nvd_cwe(const json& cve) {
    const json* weaknesses = member(cve, "weaknesses");
    if (!weaknesses || !weaknesses->is_array()) return std::nullopt;
    std::vector<const json*> ordered;
    for (const auto& w : *weaknesses) {
        if (string_member(w, "type").value_or("") == "Primary") ordered.push_back(&w);
    }
    for (const auto& w : *weaknesses) {
        if (string_member(w, "type").value_or("") != "Primary") ordered.push_back(&w);
    }
    for (const json* w : ordered) {
        const json* descs = member(*w, "description");
        if (!descs || !descs->is_array()) continue;
        for (const auto& d : *descs) {
            if (auto value = string_member(d, "value")) {
                if (auto id = CweId::parse(text::trim(*value))) return id;
            }
        }
    }
    return std::nullopt;
}

std::optional<std::string> english_description(const json& cve) {
    const json* descs = member(cve, "descriptions");
    if (!descs || !descs->is_array()) return std::nullopt;
    for (const auto& d : *descs) {
        if (string_member(d, "lang").value_or("") == "en") {
            if (auto v = string_member(d, "value")) return v;
        }
    }
    return std::nullopt;
}

FeedParseResult parse_nvd_json(std::string_view source) {
    json doc;
    try {
        doc = json::parse(source.begin(), source.end());
    } catch (const json::parse_error& e) {
        rethrow_json_error(e, source, 0, 0);
    }
    const json* entries = &doc;
    if (doc.is_object()) {
        entries = member(doc, "vulnerabilities");
        if (!entries) throw ParseError("NVD document has no 'vulnerabilities' array", 1, 0);
    }
    if (!entries->is_array()) throw ParseError("NVD 'vulnerabilities' is not an array", 1, 0);

    FeedParseResult result;
    std::size_t index = 0;
    for (const auto& entry : *entries) {
        ++index;
        const json* cve = member(entry, "cve");
        if (!cve) cve = &entry;  // tolerate flattened entries
        auto id = string_member(*cve, "id");
        if (!id) {
            result.rejects.push_back({index, "missing cve id"});
            continue;
        }
        const auto key = CveKey::parse(*id);
        if (!key) {
            result.rejects.push_back({index, "invalid cve id '" + *id + "'"});
            continue;
        }
        auto description = english_description(*cve);
        if (!description) {
            result.rejects.push_back({index, *id + ": no English description"});
            continue;
        }
        CveRecord rec;
        rec.cve_id = std::move(*id);
        rec.description = std::move(*description);
        rec.nvd_cwe = select_nvd_cwe(*cve);
        rec.year = key->year;
        rec.last_modified = string_member(*cve, "lastModified");
        result.records.push_back(std::move(rec));
    }
    return result;
}

const std::set<std::string>& record_fields() {
    static const std::set<std::string> fields{"cve_id", "description", "nvd_cwe", "last_modified", "attack_techniques"};
    return fields;
}

FeedParseResult parse_record_jsonl(std::string_view source, const FeedOptions& options) {
    FeedParseResult result;
    for (const auto& line : text::split_lines(source)) {
        if (text::trim(line.text).empty()) continue;
        json obj;
        try {
            obj = json::parse(line.text.begin(), line.text.end());
        } catch (const json::parse_error& e) {
            rethrow_json_error(e, source, line.offset, line.number);
        }
        if (!obj.is_object()) throw ParseError("record line is not a JSON object", line.number, line.offset);

        for (const auto& [key, _] : obj.items()) {
            if (record_fields().count(key)) continue;
            if (options.strict) throw ParseError("unknown field '" + key + "' in strict mode", line.number, line.offset);
            result.warnings.push_back("line " + std::to_string(line.number) + ": ignoring unknown field '" + key + "'");
        }

        auto id = string_member(obj, "cve_id");
        if (!id) {
            result.rejects.push_back({line.number, "missing cve id"});
            continue;
        }
        const auto key = CveKey::parse(*id);
        if (!key) {
            result.rejects.push_back({line.number, "invalid cve id '" + *id + "'"});
            continue;
        }
        CveRecord rec;
        rec.cve_id = std::move(*id);
        rec.year = key->year;
        rec.description = string_member(obj, "description").value_or("");
        if (const json* cwe = member(obj, "nvd_cwe")) {
            auto parsed = cwe->is_string() ? CweId::parse(cwe->get<std::string>()) : std::nullopt;
            if (!parsed) {
                result.rejects.push_back({line.number, rec.cve_id + ": invalid nvd_cwe " + cwe->dump()});
                continue;
            }
            rec.nvd_cwe = parsed;
        }
        rec.last_modified = string_member(obj, "last_modified");
        if (const json* techniques = member(obj, "attack_techniques")) {
            if (!techniques->is_array()) {
                result.rejects.push_back({line.number, rec.cve_id + ": attack_techniques is not an array"});
                continue;
            }
            std::vector<std::string> values;
            bool ok = true;
            for (const auto& t : *techniques) {
                if (!t.is_string()) {
                    ok = false;
                    break;
                }
                values.push_back(t.get<std::string>());
            }
            if (!ok) {
                result.rejects.push_back({line.number, rec.cve_id + ": attack_techniques entries must be strings"});
                continue;
            }
            rec.attack_techniques = std::move(values);
        }
        result.records.push_back(std::move(rec));
    }
    return result;
}

}  // namespace

FeedParseResult parse_feed(std::string_view source, FeedFormat format, const FeedOptions& options) {
    switch (format) {
        case FeedFormat::NvdJson2:
            return parse_nvd_json(source);
        case FeedFormat::RecordJsonl:
            return parse_record_jsonl(source, options);
    }
    throw ValidationError("unsupported feed format");
}

std::string export_record_jsonl(const std::vector<CveRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        nlohmann::ordered_json obj;
        obj["cve_id"] = r.cve_id;
        obj["description"] = r.description;
        obj["nvd_cwe"] = r.nvd_cwe ? json(r.nvd_cwe->str()) : json(nullptr);
        obj["last_modified"] = r.last_modified ? json(*r.last_modified) : json(nullptr);
        obj["attack_techniques"] = r.attack_techniques ? json(*r.attack_techniques) : json(nullptr);
        out += obj.dump(-1, ' ', false, json::error_handler_t::replace);
        out += '\n';
    }
    return out;
}

std::string export_rejects_json(const std::vector<Reject>& rejects) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : rejects) {
        nlohmann::ordered_json obj;
        obj["line"] = r.line;
        obj["reason"] = r.reason;
        arr.push_back(std::move(obj));
    }
    return arr.dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

std::vector<CveRecord> deduplicate(const std::vector<CveRecord>& records) {
    std::map<std::string, std::size_t> winner;
    for (std::size_t i = 0; i < records.size(); ++i) {
        auto [it, inserted] = winner.try_emplace(records[i].cve_id, i);
        if (inserted) continue;
        // optional<string> orders nullopt first, then ISO-8601 lexically.
        if (records[i].last_modified >= records[it->second].last_modified) it->second = i;
    }
    std::vector<CveRecord> out;
    out.reserve(winner.size());
    for (const auto& [_, index] : winner) out.push_back(records[index]);
    std::stable_sort(out.begin(), out.end(),
                     [](const CveRecord& a, const CveRecord& b) { return cve_id_less(a.cve_id, b.cve_id); });
    return out;
}

FilterResult filter_insufficient(const std::vector<CveRecord>& records, const DescriptionFilter& filter) {
    FilterResult result;
    for (const auto& r : records) {
        bool drop = utf8_length(text::trim(r.description)) < filter.min_length;
        for (const auto& marker : filter.reject_markers) {
            if (drop) break;
            if (!marker.empty() && r.description.find(marker) != std::string::npos) drop = true;
        }
        (drop ? result.dropped : result.kept).push_back(r);
    }
    return result;
}

}  // namespace cvecwe
