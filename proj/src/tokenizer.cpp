// SPDX-License-Identifier: Apache-2.0

#include "cvecwe/tokenizer.hpp"

#include <cstdint>

#include "cvecwe/errors.hpp"

namespace cvecwe {

namespace {

constexpr std::uint32_t kInvalid = 0xFFFFFFFF;

// Decodes one code point starting at s[i]; advances i. Malformed sequences
// yield kInvalid and consume one byte.
std::uint32_t decode_utf8(std::string_view s, std::size_t& i) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    int len = 0;
    std::uint32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) { len = 2; cp = b0 & 0x1F; }
    else if ((b0 & 0xF0) == 0xE0) { len = 3; cp = b0 & 0x0F; }
    else if ((b0 & 0xF8) == 0xF0) { len = 4; cp = b0 & 0x07; }
    else { ++i; return kInvalid; }
    if (i + static_cast<std::size_t>(len) > s.size()) { ++i; return kInvalid; }
    for (int k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
        if ((b & 0xC0) != 0x80) { ++i; return kInvalid; }
        cp = (cp << 6) | (b & 0x3F);
    }
    i += static_cast<std::size_t>(len);
    return cp;
}

void encode_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

bool is_ascii_digit(std::uint32_t cp) { return cp >= '0' && cp <= '9'; }

bool is_word_codepoint(std::uint32_t cp) {
    if (cp == kInvalid) return false;
    if (cp < 0x80) return is_ascii_digit(cp) || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
    if (cp <= 0xBF) return cp == 0xAA || cp == 0xB5 || cp == 0xBA;  // Latin-1 punctuation/symbols
    if (cp == 0xD7 || cp == 0xF7) return false;                      // multiplication/division signs
    if (cp >= 0x2000 && cp <= 0x2BFF) return false;  // punctuation, symbols, arrows, math, box drawing
    if (cp >= 0x2E00 && cp <= 0x2E7F) return false;  // supplemental punctuation
    if (cp >= 0x3000 && cp <= 0x303F) return false;  // CJK symbols and punctuation
    if (cp >= 0xFE30 && cp <= 0xFE4F) return false;  // CJK compatibility forms
    if (cp >= 0xFF00 && cp <= 0xFF0F) return false;  // fullwidth punctuation
    if (cp >= 0xFF1A && cp <= 0xFF20) return false;
    if (cp >= 0xFF3B && cp <= 0xFF40) return false;
    if (cp >= 0xFF5B && cp <= 0xFF65) return false;
    if (cp >= 0xFFF0 && cp <= 0xFFFF) return false;    // specials
    if (cp >= 0x1F000 && cp <= 0x1FAFF) return false;  // emoji and pictographs
    if (cp >= 0xE000 && cp <= 0xF8FF) return false;    // private use
    return true;
}

std::uint32_t to_lower(std::uint32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 32;
    if (cp < 0x80) return cp;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
    if (cp >= 0x100 && cp <= 0x137) return cp | 1;  // Latin Extended-A pairs, upper even
    if (cp >= 0x139 && cp <= 0x148 && (cp & 1)) return cp + 1;
    if (cp >= 0x14A && cp <= 0x177) return cp | 1;
    if (cp == 0x178) return 0xFF;
    if (cp >= 0x179 && cp <= 0x17E && (cp & 1)) return cp + 1;
    if (cp >= 0x391 && cp <= 0x3AB && cp != 0x3A2) return cp + 32;  // Greek
    if (cp >= 0x400 && cp <= 0x40F) return cp + 80;                 // Cyrillic
    if (cp >= 0x410 && cp <= 0x42F) return cp + 32;
    return cp;
}

}  // namespace

std::vector<std::string> split_words(std::string_view text, const TokenizerConfig& cfg) {
    std::vector<std::string> words;
    std::string current;
    std::size_t length = 0;
    bool numeric = true;
    const auto flush = [&] {
        if (length > 0 && (length >= cfg.min_token_length || numeric)) words.push_back(current);
        current.clear();
        length = 0;
        numeric = true;
    };
    std::size_t i = 0;
    while (i < text.size()) {
        std::uint32_t cp = decode_utf8(text, i);
        if (!is_word_codepoint(cp)) {
            flush();
            continue;
        }
        if (cfg.lowercase) cp = to_lower(cp);
        numeric = numeric && is_ascii_digit(cp);
        encode_utf8(current, cp);
        ++length;
    }
    flush();
    return words;
}

std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& cfg) {
    if (cfg.ngram_min < 1 || cfg.ngram_max < cfg.ngram_min) throw ValidationError("invalid ngram range");
    const auto words = split_words(text, cfg);
    std::vector<std::string> tokens;
    for (int n = cfg.ngram_min; n <= cfg.ngram_max; ++n) {
        const auto order = static_cast<std::size_t>(n);
        for (std::size_t start = 0; start + order <= words.size(); ++start) {
            std::string gram = words[start];
            for (std::size_t k = 1; k < order; ++k) {
                gram.push_back(' ');
                gram += words[start + k];
            }
            tokens.push_back(std::move(gram));
        }
    }
    return tokens;
}

}  // namespace cvecwe
