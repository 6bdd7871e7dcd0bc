// SPDX-License-Identifier: Apache-2.0

#include "cvecwe/taxonomy.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <istream>
#include <iterator>
#include <optional>
#include <sstream>
#include <unordered_map>

#include "cvecwe/errors.hpp"
#include "cvecwe/text_util.hpp"

namespace cvecwe {

TaxonomyFormat taxonomy_format_from_string(std::string_view name) {
    if (name == "cwe-xml-subset" || name == "xml") return TaxonomyFormat::CweXmlSubset;
    if (name == "edge-csv" || name == "csv") return TaxonomyFormat::EdgeCsv;
    throw ValidationError("unknown taxonomy format: " + std::string(name));
}

namespace {

// Iterative DFS; on a back edge, reconstructs the cycle from the stack.
void check_acyclic(const std::map<CweId, CweNode>& nodes) {
    enum class Mark { White, Grey, Black };
    std::map<CweId, Mark> mark;
    for (const auto& [id, _] : nodes) mark[id] = Mark::White;

    for (const auto& [root, _] : nodes) {
        if (mark[root] != Mark::White) continue;
        struct Frame {
            CweId id;
            std::set<CweId>::const_iterator next;
            std::set<CweId>::const_iterator end;
        };
        std::vector<Frame> stack;
        const auto push = [&](CweId id) {
            const auto& parents = nodes.at(id).parents;
            mark[id] = Mark::Grey;
            stack.push_back({id, parents.begin(), parents.end()});
        };
        push(root);
        while (!stack.empty()) {
            Frame& top = stack.back();
            if (top.next == top.end) {
                mark[top.id] = Mark::Black;
                stack.pop_back();
                continue;
            }
            const CweId parent = *top.next++;
            if (mark[parent] == Mark::Grey) {
                std::string cycle;
                auto it = std::find_if(stack.begin(), stack.end(), [&](const Frame& f) { return f.id == parent; });
                for (; it != stack.end(); ++it) cycle += it->id.str() + " -> ";
                cycle += parent.str();
                throw StructuralError("ChildOf cycle detected: " + cycle);
            }
            if (mark[parent] == Mark::White) push(parent);
        }
    }
}

}  // namespace

CweTaxonomy::CweTaxonomy(std::map<CweId, CweNode> nodes, std::vector<CweId> vocabulary)
    : nodes_(std::move(nodes)), vocabulary_(std::move(vocabulary)) {
    std::vector<CweId> missing;
    for (auto& [id, node] : nodes_) {
        node.id = id;
        for (CweId p : node.parents) {
            if (!nodes_.count(p)) missing.push_back(p);
        }
    }
    for (CweId p : missing) nodes_.try_emplace(p, CweNode{p, {}, {}});
    check_acyclic(nodes_);
}

const CweNode* CweTaxonomy::find(CweId id) const {
    auto it = nodes_.find(id);
    return it == nodes_.end() ? nullptr : &it->second;
}

CweTaxonomy CweTaxonomy::with_vocabulary(std::vector<CweId> vocabulary) const {
    CweTaxonomy copy = *this;
    copy.vocabulary_ = std::move(vocabulary);
    return copy;
}

std::size_t CweTaxonomy::edge_count() const {
    std::size_t n = 0;
    for (const auto& [_, node] : nodes_) n += node.parents.size();
    return n;
}

std::vector<CweId> CweTaxonomy::topological_order() const {
    // Kahn's algorithm over child -> parent edges, emitting parents first.
    std::map<CweId, std::size_t> pending;  // number of unemitted parents
    std::map<CweId, std::vector<CweId>> children;
    for (const auto& [id, node] : nodes_) {
        pending[id] = node.parents.size();
        for (CweId p : node.parents) children[p].push_back(id);
    }
    std::deque<CweId> ready;
    for (const auto& [id, count] : pending) {
        if (count == 0) ready.push_back(id);
    }
    std::vector<CweId> order;
    order.reserve(nodes_.size());
    while (!ready.empty()) {
        const CweId id = ready.front();
        ready.pop_front();
        order.push_back(id);
        for (CweId child : children[id]) {
            if (--pending[child] == 0) ready.push_back(child);
        }
    }
    return order;
}

namespace {

// `offset` is the byte offset of the field within the whole source.
CweId parse_csv_id(std::string_view token, std::size_t line_number, std::size_t offset) {
    const auto trimmed = text::trim(token);
    if (auto id = CweId::parse(trimmed)) return *id;
    throw ParseError("malformed CWE id token '" + std::string(trimmed) + "'", line_number, offset);
}

CweTaxonomy parse_edge_csv(std::string_view source) {
    std::map<CweId, CweNode> nodes;
    std::vector<std::string> fields;
    bool first = true;
    for (const auto& line : text::split_lines(source)) {
        const auto row = text::trim(line.text);
        if (row.empty() || row.front() == '#') continue;
        if (first) {
            first = false;
            if (text::iequals_ascii(row.substr(0, 5), "child")) continue;
        }
        const std::size_t row_offset = line.offset + static_cast<std::size_t>(row.data() - line.text.data());
        if (!text::parse_csv_row(row, fields)) throw ParseError("unterminated quoted field", line.number, row_offset);
        if (fields.size() < 2) throw ParseError("expected child_id,parent_id[,child_name]", line.number, row_offset);

        const CweId child = parse_csv_id(fields[0], line.number, row_offset);
        auto& node = nodes.try_emplace(child, CweNode{child, {}, {}}).first->second;
        if (fields.size() >= 3 && !fields[2].empty()) node.name = fields[2];

        const auto parent_token = text::trim(fields[1]);
        if (parent_token.empty()) continue;
        const CweId parent = parse_csv_id(parent_token, line.number, row_offset + row.find(',') + 1);
        if (parent == child) throw StructuralError("ChildOf cycle detected: " + child.str() + " -> " + child.str());
        node.parents.insert(parent);
        nodes.try_emplace(parent, CweNode{parent, {}, {}});
    }
    return CweTaxonomy(std::move(nodes));
}

// Reader for the slice of the MITRE catalog schema we need. Tags are scanned
// lexically; comments, CDATA and processing instructions are skipped.
class XmlSubsetReader {
public:
    explicit XmlSubsetReader(std::string_view src) : src_(src) {}

    CweTaxonomy run() {
        std::map<CweId, CweNode> nodes;
        CweNode* current = nullptr;
        while (pos_ < src_.size()) {
            const std::size_t lt = src_.find('<', pos_);
            if (lt == std::string_view::npos) break;
            pos_ = lt;
            if (starts_with("<!--")) {
                skip_past("-->");
                continue;
            }
            if (starts_with("<![CDATA[")) {
                skip_past("]]>");
                continue;
            }
            if (starts_with("<?") || starts_with("<!")) {
                skip_past(">");
                continue;
            }
            const std::size_t tag_start = pos_;
            const std::size_t gt = find_tag_end(pos_);
            if (gt == std::string_view::npos) fail("unterminated tag", tag_start);
            const std::string_view tag = src_.substr(pos_ + 1, gt - pos_ - 1);
            pos_ = gt + 1;

            const bool closing = !tag.empty() && tag.front() == '/';
            const bool self_closing = !tag.empty() && tag.back() == '/';
            const std::string_view body = closing ? tag.substr(1) : (self_closing ? tag.substr(0, tag.size() - 1) : tag);
            const std::size_t name_end = std::min(body.find_first_of(" \t\r\n"), body.size());
            const std::string_view name = strip_ns(body.substr(0, name_end));
            const std::string_view attrs = body.substr(name_end);

            if (closing) {
                if (name == "Weakness") current = nullptr;
                continue;
            }
            if (name == "Weakness") {
                const auto id_attr = attribute(attrs, "ID", tag_start);
                if (!id_attr) fail("Weakness element without ID", tag_start);
                const CweId id = numeric_id(*id_attr, tag_start);
                auto& node = nodes.try_emplace(id, CweNode{id, {}, {}}).first->second;
                if (auto n = attribute(attrs, "Name", tag_start)) node.name = text::xml_unescape(*n);
                current = self_closing ? nullptr : &node;
            } else if (name == "Related_Weakness" && current != nullptr) {
                const auto nature = attribute(attrs, "Nature", tag_start);
                if (!nature || *nature != "ChildOf") continue;
                const auto target = attribute(attrs, "CWE_ID", tag_start);
                if (!target) fail("Related_Weakness without CWE_ID", tag_start);
                const CweId parent = numeric_id(*target, tag_start);
                if (parent == current->id) {
                    throw StructuralError("ChildOf cycle detected: " + parent.str() + " -> " + parent.str());
                }
                current->parents.insert(parent);
            }
        }
        return CweTaxonomy(std::move(nodes));
    }

private:
    bool starts_with(std::string_view s) const { return src_.substr(pos_, s.size()) == s; }

    void skip_past(std::string_view terminator) {
        const std::size_t end = src_.find(terminator, pos_);
        if (end == std::string_view::npos) fail("unterminated markup", pos_);
        pos_ = end + terminator.size();
    }

    std::size_t find_tag_end(std::size_t from) const {
        char quote = 0;
        for (std::size_t i = from + 1; i < src_.size(); ++i) {
            const char c = src_[i];
            if (quote) {
                if (c == quote) quote = 0;
            } else if (c == '"' || c == '\'') {
                quote = c;
            } else if (c == '>') {
                return i;
            }
        }
        return std::string_view::npos;
    }

    static std::string_view strip_ns(std::string_view name) {
        const std::size_t colon = name.find(':');
        return colon == std::string_view::npos ? name : name.substr(colon + 1);
    }

    std::optional<std::string_view> attribute(std::string_view attrs, std::string_view key, std::size_t at) const {
        std::size_t i = 0;
        while (i < attrs.size()) {
            while (i < attrs.size() && std::isspace(static_cast<unsigned char>(attrs[i]))) ++i;
            if (i >= attrs.size()) break;
            const std::size_t eq = attrs.find('=', i);
            if (eq == std::string_view::npos) break;
            const std::string_view k = text::trim(attrs.substr(i, eq - i));
            std::size_t v = eq + 1;
            while (v < attrs.size() && std::isspace(static_cast<unsigned char>(attrs[v]))) ++v;
            if (v >= attrs.size() || (attrs[v] != '"' && attrs[v] != '\'')) fail("unquoted attribute value", at);
            const char quote = attrs[v];
            const std::size_t close = attrs.find(quote, v + 1);
            if (close == std::string_view::npos) fail("unterminated attribute value", at);
            if (strip_ns(k) == key) return attrs.substr(v + 1, close - v - 1);
            i = close + 1;
        }
        return std::nullopt;
    }

    CweId numeric_id(std::string_view token, std::size_t at) const {
        const auto trimmed = text::trim(token);
        if (auto id = cwe_from_number_token(trimmed)) return *id;
        if (auto id = CweId::parse(trimmed)) return *id;
        fail("malformed CWE id token '" + std::string(trimmed) + "'", at);
    }

    [[noreturn]] void fail(const std::string& what, std::size_t offset) const {
        const std::size_t line = 1 + static_cast<std::size_t>(std::count(src_.begin(), src_.begin() + static_cast<std::ptrdiff_t>(std::min(offset, src_.size())), '\n'));
        throw ParseError(what, line, offset);
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

}  // namespace

CweTaxonomy parse_taxonomy(std::string_view source, TaxonomyFormat format) {
    switch (format) {
        case TaxonomyFormat::EdgeCsv:
            return parse_edge_csv(source);
        case TaxonomyFormat::CweXmlSubset:
            return XmlSubsetReader(source).run();
    }
    throw ValidationError("unsupported taxonomy format");
}

CweTaxonomy parse_taxonomy(std::istream& in, TaxonomyFormat format) {
    const std::string content{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return parse_taxonomy(content, format);
}

std::string export_edge_csv(const CweTaxonomy& t) {
    std::string out = "child,parent,child_name\n";
    for (const auto& [id, node] : t.nodes()) {
        const std::string name = text::csv_escape(node.name);
        if (node.parents.empty()) {
            out += id.str() + ",," + name + "\n";
            continue;
        }
        for (CweId p : node.parents) out += id.str() + "," + p.str() + "," + name + "\n";
    }
    return out;
}

std::set<CweId> ancestors(const CweTaxonomy& t, CweId id, int depth) {
    if (depth < 1) throw ValidationError("ancestor depth must be >= 1");
    std::set<CweId> seen;
    std::vector<CweId> frontier{id};
    for (int level = 0; level < depth && !frontier.empty(); ++level) {
        std::vector<CweId> next;
        for (CweId cur : frontier) {
            const CweNode* node = t.find(cur);
            if (!node) continue;
            for (CweId p : node->parents) {
                if (p != id && seen.insert(p).second) next.push_back(p);
            }
        }
        frontier = std::move(next);
    }
    return seen;
}

bool is_hierarchy_equivalent(const CweTaxonomy& t, CweId pred, CweId truth, int depth) {
    if (pred == truth) return true;
    if (depth < 1) throw ValidationError("equivalence depth must be >= 1");
    if (!t.contains(pred) || !t.contains(truth)) return false;
    return ancestors(t, truth, depth).count(pred) != 0 || ancestors(t, pred, depth).count(truth) != 0;
}

std::vector<CweId> validate_vocabulary(const CweTaxonomy& t, const std::vector<CweId>& vocab) {
    std::vector<CweId> missing;
    for (CweId id : vocab) {
        if (!t.contains(id)) missing.push_back(id);
    }
    return missing;
}

std::vector<CweId> parse_vocabulary(std::string_view source) {
    std::vector<CweId> vocab;
    for (const auto& line : text::split_lines(source)) {
        auto row = line.text;
        if (auto hash = row.find('#'); hash != std::string_view::npos) row = row.substr(0, hash);
        row = text::trim(row);
        if (row.empty()) continue;
        auto id = CweId::parse(row);
        if (!id) throw ParseError("malformed CWE id token '" + std::string(row) + "'", line.number, 0);
        vocab.push_back(*id);
    }
    return vocab;
}

}  // namespace cvecwe
