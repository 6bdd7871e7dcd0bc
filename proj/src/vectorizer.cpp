// SPDX-License-Identifier: Apache-2.0

#include "cvecwe/vectorizer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

#include "cvecwe/errors.hpp"

namespace cvecwe {

double l2_norm(const SparseVector& v) {
    double sum = 0.0;
    for (const auto& e : v) sum += e.weight * e.weight;
    return std::sqrt(sum);
}

VectorizerModel::VectorizerModel(TokenizerConfig tokenizer, std::size_t max_features, std::vector<std::string> terms,
                                 std::vector<double> idf)
    : tokenizer_(tokenizer), max_features_(max_features), terms_(std::move(terms)), idf_(std::move(idf)) {
    if (terms_.size() != idf_.size()) throw ValidationError("vectorizer terms and idf differ in length");
    index_.reserve(terms_.size());
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        if (!(std::isfinite(idf_[i]) && idf_[i] > 0.0)) throw ValidationError("idf must be finite and positive");
        if (!index_.emplace(terms_[i], static_cast<std::uint32_t>(i)).second) {
            throw ValidationError("duplicate vectorizer term: " + terms_[i]);
        }
    }
}

std::int64_t VectorizerModel::index_of(std::string_view term) const {
    auto it = index_.find(std::string(term));
    return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

SparseVector VectorizerModel::transform(std::string_view doc) const {
    std::map<std::uint32_t, double> counts;
    for (const auto& tok : tokenize(doc, tokenizer_)) {
        if (auto it = index_.find(tok); it != index_.end()) counts[it->second] += 1.0;
    }
    SparseVector v;
    v.reserve(counts.size());
    for (const auto& [index, count] : counts) v.push_back({index, count * idf_[index]});
    const double norm = l2_norm(v);
    if (norm > 0.0) {
        for (auto& e : v) e.weight /= norm;
    }
    return v;
}

VectorizerModel fit_vectorizer(const std::vector<std::string>& docs, const VectorizerConfig& cfg) {
    if (docs.empty()) throw ValidationError("cannot fit a vectorizer on zero documents");

    std::unordered_map<std::string, std::size_t> df;
    std::unordered_set<std::string> seen;
    for (const auto& doc : docs) {
        seen.clear();
        for (auto& tok : tokenize(doc, cfg.tokenizer)) {
            if (seen.insert(tok).second) ++df[std::move(tok)];
        }
    }
    if (df.empty()) throw ValidationError("all documents are empty after tokenization");

    std::vector<std::pair<std::string, std::size_t>> ranked(df.begin(), df.end());
    const std::size_t keep = std::min(cfg.max_features, ranked.size());
    const auto better = [](const auto& a, const auto& b) { return a.second != b.second ? a.second > b.second : a.first < b.first; };
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end(), better);
    ranked.resize(keep);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    const auto n = static_cast<double>(docs.size());
    std::vector<std::string> terms;
    std::vector<double> idf;
    terms.reserve(keep);
    idf.reserve(keep);
    for (auto& [term, count] : ranked) {
        idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
        terms.push_back(std::move(term));
    }
    return VectorizerModel(cfg.tokenizer, cfg.max_features, std::move(terms), std::move(idf));
}

}  // namespace cvecwe
