// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cvecwe/tokenizer.hpp"

namespace cvecwe {

struct SparseEntry {
    std::uint32_t index;
    double weight;

    friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

// Indices strictly increasing, weights non-zero.
using SparseVector = std::vector<SparseEntry>;

double l2_norm(const SparseVector& v);

struct VectorizerConfig {
    TokenizerConfig tokenizer;
    std::size_t max_features = 50000;
};

// TF-IDF with raw term counts, smooth idf, and L2 normalization.
class VectorizerModel {
public:
    VectorizerModel() = default;
    VectorizerModel(TokenizerConfig tokenizer, std::size_t max_features, std::vector<std::string> terms,
                    std::vector<double> idf);

    const TokenizerConfig& tokenizer() const noexcept { return tokenizer_; }
    std::size_t max_features() const noexcept { return max_features_; }
    // Feature i is terms()[i]; terms are sorted bytewise.
    const std::vector<std::string>& terms() const noexcept { return terms_; }
    const std::vector<double>& idf() const noexcept { return idf_; }
    std::size_t num_features() const noexcept { return terms_.size(); }

    // -1 when the term is out of vocabulary.
    std::int64_t index_of(std::string_view term) const;

    // weight(t) = count(t) * idf(t) over in-vocabulary terms, then scaled to
    // unit Euclidean norm. Empty when nothing is in vocabulary.
    SparseVector transform(std::string_view doc) const;

private:
    TokenizerConfig tokenizer_;
    std::size_t max_features_ = 0;
    std::vector<std::string> terms_;
    std::vector<double> idf_;
    std::unordered_map<std::string, std::uint32_t> index_;
};

// Keeps the max_features terms with the highest document frequency (ties to
// the bytewise smaller term), then idf(t) = ln((1 + N) / (1 + df(t))) + 1.
// Throws ValidationError when docs is empty or yields no tokens at all.
VectorizerModel fit_vectorizer(const std::vector<std::string>& docs, const VectorizerConfig& cfg);

}  // namespace cvecwe
