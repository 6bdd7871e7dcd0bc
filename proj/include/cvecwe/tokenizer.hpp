// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace cvecwe {

struct TokenizerConfig {
    bool lowercase = true;
    int ngram_min = 1;
    int ngram_max = 2;
    // Tokens shorter than this (in code points) are dropped unless purely numeric.
    std::size_t min_token_length = 2;

    friend bool operator==(const TokenizerConfig&, const TokenizerConfig&) = default;
};

// Maximal runs of letters/digits, lowercased if configured. ASCII is handled
// exactly; outside ASCII, everything except known punctuation, symbol, and
// space blocks counts as a word character.
std::vector<std::string> split_words(std::string_view text, const TokenizerConfig& cfg);

// All n-grams for n in [ngram_min, ngram_max], grouped by order (unigrams
// first), each group in text order, words joined by a single space.
std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& cfg);

}  // namespace cvecwe
