// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cvecwe/cwe_id.hpp"

namespace cvecwe {

// "CVE-YYYY-NNNN+" split into its numeric parts. Ordering is (year, sequence),
// so CVE-2020-9999 sorts before CVE-2020-10000.
struct CveKey {
    int year = 0;
    std::uint64_t sequence = 0;

    static std::optional<CveKey> parse(std::string_view cve_id);
    friend auto operator<=>(const CveKey&, const CveKey&) = default;
};

bool is_valid_cve_id(std::string_view cve_id);

// Orders canonical CVE ids numerically; falls back to byte order for
// anything that does not parse.
bool cve_id_less(std::string_view a, std::string_view b);

struct CveRecord {
    std::string cve_id;
    std::string description;
    std::optional<CweId> nvd_cwe;
    int year = 0;
    std::optional<std::string> last_modified;  // ISO-8601
    std::optional<std::vector<std::string>> attack_techniques;  // carried through untouched

    friend bool operator==(const CveRecord&, const CveRecord&) = default;
};

struct DescriptionFilter {
    std::size_t min_length = 20;  // Unicode code points after trimming
    std::vector<std::string> reject_markers{"** REJECT **", "** RESERVED **"};
};

enum class FeedFormat { NvdJson2, RecordJsonl };

FeedFormat feed_format_from_string(std::string_view name);

struct Reject {
    std::size_t line;  // JSONL line number, or 1-based entry index for NVD JSON
    std::string reason;

    friend bool operator==(const Reject&, const Reject&) = default;
};

struct FeedOptions {
    // record-jsonl only: unknown fields are an error instead of a warning.
    bool strict = false;
};

struct FeedParseResult {
    std::vector<CveRecord> records;
    std::vector<Reject> rejects;
    std::vector<std::string> warnings;
};

// Malformed JSON throws ParseError with the byte offset; record-level problems
// (missing or invalid id, invalid CWE token) land in rejects and parsing
// continues. NVD entries without an English description are rejected.
FeedParseResult parse_feed(std::string_view source, FeedFormat format, const FeedOptions& options = {});

// Canonical record-jsonl, one object per line in input order.
std::string export_record_jsonl(const std::vector<CveRecord>& records);
std::string export_rejects_json(const std::vector<Reject>& rejects);

// One record per cve_id: latest last_modified wins (absent sorts oldest), ties
// go to the later input. Output is ordered by cve_id.
std::vector<CveRecord> deduplicate(const std::vector<CveRecord>& records);

struct FilterResult {
    std::vector<CveRecord> kept;
    std::vector<CveRecord> dropped;
};

FilterResult filter_insufficient(const std::vector<CveRecord>& records, const DescriptionFilter& filter);

std::size_t utf8_length(std::string_view s);

}  // namespace cvecwe
