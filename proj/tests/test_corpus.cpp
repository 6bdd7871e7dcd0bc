// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <map>
#include <random>
#include <set>

#include "cvecwe/corpus.hpp"
#include "cvecwe/errors.hpp"
#include "test_support.hpp"

using namespace cvecwe;

namespace {

std::string nvd_entry(const std::string& id, const std::string& weakness_json, const std::string& extra = "") {
    return R"({"cve":{"id":")" + id + R"(","lastModified":"2024-01-02T03:04:05.000","descriptions":[{"lang":"en","value":"A sufficiently long English description."}])" +
           (weakness_json.empty() ? "" : R"(,"weaknesses":)" + weakness_json) + extra + "}}";
}

std::string nvd_doc(const std::vector<std::string>& entries) {
    std::string out = R"({"format":"NVD_CVE","version":"2.0","vulnerabilities":[)";
    for (std::size_t i = 0; i < entries.size(); ++i) out += (i ? "," : "") + entries[i];
    return out + "]}";
}

std::string weakness(const std::string& type, const std::string& value) {
    return R"({"source":"nvd@nist.gov","type":")" + type + R"(","description":[{"lang":"en","value":")" + value + R"("}]})";
}

CveRecord rec(std::string id, std::string desc, std::optional<std::string> modified = std::nullopt) {
    CveRecord r;
    r.cve_id = std::move(id);
    r.description = std::move(desc);
    r.year = CveKey::parse(r.cve_id)->year;
    r.last_modified = std::move(modified);
    return r;
}

}  // namespace

TEST(CveIdFormat, PatternAndOrdering) {
    EXPECT_TRUE(is_valid_cve_id("CVE-2024-1234"));
    EXPECT_TRUE(is_valid_cve_id("CVE-2021-44228"));
    EXPECT_FALSE(is_valid_cve_id("CVE-2024-123"));
    EXPECT_FALSE(is_valid_cve_id("CVE-24-1234"));
    EXPECT_FALSE(is_valid_cve_id("cve-2024-1234"));
    EXPECT_FALSE(is_valid_cve_id("CVE-2024-12a4"));
    EXPECT_TRUE(cve_id_less("CVE-2021-9999", "CVE-2021-10000"));
    EXPECT_TRUE(cve_id_less("CVE-2020-99999", "CVE-2021-0001"));
    EXPECT_FALSE(cve_id_less("CVE-2021-0001", "CVE-2021-0001"));
}

TEST(ParseNvd, WeaknessCweIsCaptured) {
    const auto r = parse_feed(nvd_doc({nvd_entry("CVE-2024-0001", "[" + weakness("Primary", "CWE-79") + "]")}), FeedFormat::NvdJson2);
    ASSERT_EQ(r.records.size(), 1u);
    EXPECT_EQ(r.records[0].nvd_cwe, CweId(79));
    EXPECT_EQ(r.records[0].year, 2024);
    EXPECT_EQ(r.records[0].last_modified, "2024-01-02T03:04:05.000");
    EXPECT_EQ(r.records[0].description, "A sufficiently long English description.");
}

TEST(ParseNvd, NonNumericWeaknessGivesNoLabel) {
    for (const char* v : {"NVD-CWE-Other", "NVD-CWE-noinfo"}) {
        const auto r = parse_feed(nvd_doc({nvd_entry("CVE-2024-0002", "[" + weakness("Primary", v) + "]")}), FeedFormat::NvdJson2);
        ASSERT_EQ(r.records.size(), 1u);
        EXPECT_FALSE(r.records[0].nvd_cwe.has_value()) << v;
    }
    const auto none = parse_feed(nvd_doc({nvd_entry("CVE-2024-0003", "")}), FeedFormat::NvdJson2);
    EXPECT_FALSE(none.records.at(0).nvd_cwe.has_value());
}

TEST(ParseNvd, PrimaryPreferredOverEarlierSecondary) {
    const auto w = "[" + weakness("Secondary", "CWE-20") + "," + weakness("Primary", "CWE-787") + "]";
    const auto r = parse_feed(nvd_doc({nvd_entry("CVE-2024-0004", w)}), FeedFormat::NvdJson2);
    EXPECT_EQ(r.records.at(0).nvd_cwe, CweId(787));
}

TEST(ParseNvd, FirstMatchingValueWithinSource) {
    const auto w = R"([{"type":"Primary","description":[{"lang":"en","value":"NVD-CWE-Other"},{"lang":"en","value":"CWE-89"},{"lang":"en","value":"CWE-79"}]}])";
    EXPECT_EQ(parse_feed(nvd_doc({nvd_entry("CVE-2024-0005", w)}), FeedFormat::NvdJson2).records.at(0).nvd_cwe, CweId(89));
}

TEST(ParseNvd, EnglishDescriptionSelected) {
    const std::string entry =
        R"({"cve":{"id":"CVE-2023-1111","descriptions":[{"lang":"es","value":"Descripcion"},{"lang":"en","value":"English text"}]}})";
    EXPECT_EQ(parse_feed(nvd_doc({entry}), FeedFormat::NvdJson2).records.at(0).description, "English text");
}

TEST(ParseNvd, RecordLevelProblemsAreCollected) {
    const std::string no_id = R"({"cve":{"descriptions":[{"lang":"en","value":"x"}]}})";
    const std::string bad_id = R"({"cve":{"id":"CVE-XX-1","descriptions":[{"lang":"en","value":"x"}]}})";
    const std::string spanish = R"({"cve":{"id":"CVE-2023-2222","descriptions":[{"lang":"es","value":"solo"}]}})";
    const auto r = parse_feed(nvd_doc({no_id, nvd_entry("CVE-2024-0006", ""), bad_id, spanish}), FeedFormat::NvdJson2);
    EXPECT_EQ(r.records.size(), 1u);
    ASSERT_EQ(r.rejects.size(), 3u);
    EXPECT_EQ(r.rejects[0], (Reject{1, "missing cve id"}));
    EXPECT_EQ(r.rejects[1].line, 3u);
    EXPECT_EQ(r.rejects[2].line, 4u);
}

TEST(ParseNvd, BareArrayAccepted) {
    const auto r = parse_feed("[" + nvd_entry("CVE-2024-0007", "") + "]", FeedFormat::NvdJson2);
    EXPECT_EQ(r.records.size(), 1u);
}

TEST(ParseNvd, MalformedJsonReportsByteOffset) {
    const std::string text = "{\"vulnerabilities\": [\n  {\"cve\": {\"id\": \"CVE-2024-0001\",, }}\n]}";
    try {
        parse_feed(text, FeedFormat::NvdJson2);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
        EXPECT_EQ(e.offset(), text.find(",,") + 1);
    }
    EXPECT_THROW(parse_feed(R"({"other": []})", FeedFormat::NvdJson2), ParseError);
}

TEST(ParseJsonl, MalformedLineReportsLineAndOffset) {
    const std::string text = "{\"cve_id\":\"CVE-2024-0001\",\"description\":\"ok ok ok\"}\n{\"cve_id\": oops}\n";
    try {
        parse_feed(text, FeedFormat::RecordJsonl);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
        EXPECT_EQ(e.offset(), text.find("oops"));
    }
}

TEST(ParseJsonl, UnknownFieldsWarnOrFail) {
    const std::string text = R"({"cve_id":"CVE-2024-0001","description":"desc","severity":"HIGH"})" "\n";
    const auto lenient = parse_feed(text, FeedFormat::RecordJsonl);
    EXPECT_EQ(lenient.records.size(), 1u);
    ASSERT_EQ(lenient.warnings.size(), 1u);
    EXPECT_NE(lenient.warnings[0].find("severity"), std::string::npos);
    EXPECT_THROW(parse_feed(text, FeedFormat::RecordJsonl, FeedOptions{true}), ParseError);
}

TEST(ParseJsonl, InvalidValuesAreRejectedNotFatal) {
    const std::string text =
        R"({"description":"no id"})" "\n"
        R"({"cve_id":"CVE-2024-0002","description":"d","nvd_cwe":"CWE-007"})" "\n"
        R"({"cve_id":"CVE-2024-0003","description":"d","attack_techniques":"T1059"})" "\n"
        R"({"cve_id":"CVE-2024-0004","description":"d","attack_techniques":["T1059","T1190"]})" "\n";
    const auto r = parse_feed(text, FeedFormat::RecordJsonl);
    ASSERT_EQ(r.records.size(), 1u);
    EXPECT_EQ(r.records[0].attack_techniques, (std::vector<std::string>{"T1059", "T1190"}));
    ASSERT_EQ(r.rejects.size(), 3u);
    EXPECT_EQ(r.rejects[0].line, 1u);
    EXPECT_EQ(r.rejects[1].line, 2u);
    EXPECT_EQ(r.rejects[2].line, 3u);
}

TEST(ParseJsonl, RoundTripIsIdentity) {
    std::vector<CveRecord> records;
    records.push_back(rec("CVE-2020-0001", "Plain ASCII description text"));
    auto r2 = rec("CVE-2021-12345", "Ünïcödé \"quoted\" \\ back\tslash\nnewline — 日本語", "2022-02-02T00:00:00.000");
    r2.nvd_cwe = CweId(787);
    r2.attack_techniques = std::vector<std::string>{"T1190"};
    records.push_back(r2);
    auto r3 = rec("CVE-1999-0001", "");
    r3.attack_techniques = std::vector<std::string>{};
    records.push_back(r3);
    const auto text = export_record_jsonl(records);
    const auto back = parse_feed(text, FeedFormat::RecordJsonl, FeedOptions{true});
    EXPECT_TRUE(back.rejects.empty());
    EXPECT_EQ(back.records, records);
    EXPECT_EQ(export_record_jsonl(back.records), text);
}

TEST(ParseJsonl, ExportFieldOrderIsFixed) {
    auto r = rec("CVE-2020-0001", "d");
    EXPECT_EQ(export_record_jsonl({r}),
              R"({"cve_id":"CVE-2020-0001","description":"d","nvd_cwe":null,"last_modified":null,"attack_techniques":null})" "\n");
}

TEST(Rejects, JsonShape) {
    const auto j = nlohmann::json::parse(export_rejects_json({{3, "missing cve id"}}));
    ASSERT_TRUE(j.is_array());
    EXPECT_EQ(j[0]["line"], 3);
    EXPECT_EQ(j[0]["reason"], "missing cve id");
    EXPECT_EQ(export_rejects_json({}), "[]\n");
}

TEST(FeedFormatNames, Known) {
    EXPECT_EQ(feed_format_from_string("nvd-json-2"), FeedFormat::NvdJson2);
    EXPECT_EQ(feed_format_from_string("record-jsonl"), FeedFormat::RecordJsonl);
    EXPECT_THROW(feed_format_from_string("csv"), ValidationError);
}

TEST(Deduplicate, NewerSurvives) {
    const auto out = deduplicate({rec("CVE-2020-0001", "old", "2020-01-01T00:00:00.000"),
                                  rec("CVE-2020-0001", "new", "2021-01-01T00:00:00.000"),
                                  rec("CVE-2020-0001", "older", "2019-01-01T00:00:00.000")});
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].description, "new");
}

TEST(Deduplicate, TieKeepsLaterInput) {
    const auto out = deduplicate({rec("CVE-2020-0001", "first"), rec("CVE-2020-0001", "second")});
    EXPECT_EQ(out.at(0).description, "second");
    const auto dated = deduplicate({rec("CVE-2020-0001", "first", "2020-01-01"), rec("CVE-2020-0001", "second", "2020-01-01")});
    EXPECT_EQ(dated.at(0).description, "second");
}

TEST(Deduplicate, NoDuplicatesSortsById) {
    const auto out = deduplicate({rec("CVE-2021-10000", "a"), rec("CVE-2020-0002", "b"), rec("CVE-2021-9999", "c")});
    ASSERT_EQ(out.size(), 3u);
    EXPECT_EQ(out[0].cve_id, "CVE-2020-0002");
    EXPECT_EQ(out[1].cve_id, "CVE-2021-9999");
    EXPECT_EQ(out[2].cve_id, "CVE-2021-10000");
}

TEST(Deduplicate, FixtureTenRecordsThreeDuplicates) {
    const auto parsed = parse_feed(fixtures::read_fixture("dedup_10.jsonl"), FeedFormat::RecordJsonl);
    ASSERT_EQ(parsed.records.size(), 10u);
    const auto out = deduplicate(parsed.records);
    ASSERT_EQ(out.size(), 7u);
    std::map<std::string, std::string> by_id;
    for (const auto& r : out) by_id[r.cve_id] = r.description;
    EXPECT_EQ(by_id["CVE-2021-0001"], "Deduplication fixture: newer copy of one.");
    EXPECT_EQ(by_id["CVE-2021-0003"], "Deduplication fixture: second undated copy of three.");
    EXPECT_EQ(by_id["CVE-2021-0005"], "Deduplication fixture: second copy of five, same timestamp.");
    EXPECT_EQ(out.back().cve_id, "CVE-2021-10000");
}

TEST(Filter, MarkerAndLength) {
    const DescriptionFilter f;
    EXPECT_EQ(f.min_length, 20u);
    const auto r = filter_insufficient({rec("CVE-2020-0001", "** REJECT ** duplicate of CVE-2020-0002, do not use"),
                                        rec("CVE-2020-0002", std::string(500, 'x')),
                                        rec("CVE-2020-0003", "** RESERVED ** pending publication by the vendor"),
                                        rec("CVE-2020-0004", "short")},
                                       f);
    ASSERT_EQ(r.kept.size(), 1u);
    EXPECT_EQ(r.kept[0].cve_id, "CVE-2020-0002");
    EXPECT_EQ(r.dropped.size(), 3u);
}

TEST(Filter, LengthCountsCodePointsAfterTrimming) {
    DescriptionFilter f;
    f.min_length = 5;
    // "ééééé" is 5 code points but 10 bytes; padded with spaces.
    const auto r = filter_insufficient({rec("CVE-2020-0001", "  \xC3\xA9\xC3\xA9\xC3\xA9\xC3\xA9\xC3\xA9  "),
                                        rec("CVE-2020-0002", "   abcd   ")},
                                       f);
    ASSERT_EQ(r.kept.size(), 1u);
    EXPECT_EQ(r.kept[0].cve_id, "CVE-2020-0001");
    f.min_length = 0;
    EXPECT_EQ(filter_insufficient({rec("CVE-2020-0003", "")}, f).kept.size(), 1u);
    EXPECT_EQ(utf8_length("\xE6\x97\xA5\xE6\x9C\xAC"), 2u);
}

TEST(Filter, FixtureTwentyRecordsFourShort) {
    const auto parsed = parse_feed(fixtures::read_fixture("filter_20.jsonl"), FeedFormat::RecordJsonl);
    ASSERT_EQ(parsed.records.size(), 20u);
    const auto r = filter_insufficient(parsed.records, DescriptionFilter{});
    EXPECT_EQ(r.kept.size(), 16u);
    EXPECT_EQ(r.dropped.size(), 4u);
}

TEST(BundledFeed, ThousandRecordsMatchManifest) {
    const auto manifest = nlohmann::json::parse(fixtures::read_fixture("nvd_feed_1000.manifest.json"));
    const auto r = parse_feed(fixtures::read_fixture("nvd_feed_1000.json"), FeedFormat::NvdJson2);
    EXPECT_TRUE(r.rejects.empty());
    ASSERT_EQ(r.records.size(), manifest["entries"].get<std::size_t>());
    EXPECT_EQ(r.records.size(), 1000u);
    std::map<std::string, std::size_t> per_year;
    for (const auto& rec : r.records) ++per_year[std::to_string(rec.year)];
    using YearCounts = std::map<std::string, std::size_t>;
    EXPECT_EQ(per_year, manifest["per_year"].get<YearCounts>());
}

// ---------------------------------------------------------------- properties

TEST(CorpusProperty, DedupIdempotentAndFilterPartitions) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<CveRecord> records;
        const int n = static_cast<int>(rng() % 40);
        for (int i = 0; i < n; ++i) {
            const auto id = "CVE-20" + std::to_string(10 + rng() % 3) + "-" + std::to_string(1000 + rng() % 8);
            std::optional<std::string> modified;
            if (rng() % 3) modified = "2020-0" + std::to_string(1 + rng() % 9) + "-01";
            records.push_back(rec(id, std::string(rng() % 40, 'a') + (rng() % 5 == 0 ? "** REJECT **" : ""), modified));
        }
        const auto once = deduplicate(records);
        EXPECT_EQ(deduplicate(once), once);
        std::set<std::string> ids;
        for (const auto& r : once) EXPECT_TRUE(ids.insert(r.cve_id).second);

        const auto part = filter_insufficient(records, DescriptionFilter{});
        EXPECT_EQ(part.kept.size() + part.dropped.size(), records.size());
        std::multiset<std::string> joined, original;
        for (const auto& r : part.kept) joined.insert(r.cve_id + "|" + r.description + "|" + r.last_modified.value_or(""));
        for (const auto& r : part.dropped) joined.insert(r.cve_id + "|" + r.description + "|" + r.last_modified.value_or(""));
        for (const auto& r : records) original.insert(r.cve_id + "|" + r.description + "|" + r.last_modified.value_or(""));
        EXPECT_EQ(joined, original);
        for (const auto& r : part.kept) EXPECT_EQ(r.year, CveKey::parse(r.cve_id)->year);
    }
}
