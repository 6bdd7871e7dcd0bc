// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cvecwe/cwe_id.hpp"

namespace cvecwe {

struct CweNode {
    CweId id;
    std::string name;
    std::set<CweId> parents;  // ChildOf targets; never contains id
};

enum class TaxonomyFormat { CweXmlSubset, EdgeCsv };

TaxonomyFormat taxonomy_format_from_string(std::string_view name);

// Immutable CWE hierarchy. ChildOf edges point from a node to its parents and
// always form a DAG; construction rejects cycles. Safe for concurrent reads.
class CweTaxonomy {
public:
    CweTaxonomy() = default;

    // Builds from a node map. Parents that have no node of their own get an
    // unnamed one. Throws StructuralError if the edges contain a cycle.
    explicit CweTaxonomy(std::map<CweId, CweNode> nodes, std::vector<CweId> vocabulary = {});

    const std::map<CweId, CweNode>& nodes() const noexcept { return nodes_; }
    const std::vector<CweId>& vocabulary() const noexcept { return vocabulary_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    bool contains(CweId id) const { return nodes_.count(id) != 0; }
    const CweNode* find(CweId id) const;

    // Returns a copy carrying the given target vocabulary.
    CweTaxonomy with_vocabulary(std::vector<CweId> vocabulary) const;

    // Parents first: every node appears after all of its ChildOf targets.
    std::vector<CweId> topological_order() const;

    std::size_t edge_count() const;

private:
    std::map<CweId, CweNode> nodes_;
    std::vector<CweId> vocabulary_;
};

// Parses a catalog. edge-csv rows are "child_id,parent_id[,child_name]" with
// an optional "child,parent,child_name" header; an empty parent field declares
// a node without adding an edge. The XML reader extracts Weakness ID/Name and
// Related_Weakness entries with Nature="ChildOf"; everything else is skipped.
CweTaxonomy parse_taxonomy(std::string_view source, TaxonomyFormat format);
CweTaxonomy parse_taxonomy(std::istream& in, TaxonomyFormat format);

// Canonical edge-csv: header line, LF endings, one row per ChildOf edge sorted
// by child then parent, plus a "child,,name" row for each parentless node.
std::string export_edge_csv(const CweTaxonomy& t);

// Ids reachable through 1..depth ChildOf edges, excluding id itself.
std::set<CweId> ancestors(const CweTaxonomy& t, CweId id, int depth);

// True when pred == truth or one is within `depth` ChildOf hops above the
// other. Ids missing from the taxonomy have no relatives.
bool is_hierarchy_equivalent(const CweTaxonomy& t, CweId pred, CweId truth, int depth);

// Entries of vocab that have no node in t, in input order.
std::vector<CweId> validate_vocabulary(const CweTaxonomy& t, const std::vector<CweId>& vocab);

// One CWE id per line; blank lines and '#' comments ignored.
std::vector<CweId> parse_vocabulary(std::string_view text);

}  // namespace cvecwe
