// SPDX-License-Identifier: Apache-2.0

#include "cvecwe/cwe_id.hpp"

#include <limits>

#include "cvecwe/errors.hpp"

namespace cvecwe {

std::optional<CweId> cwe_from_number_token(std::string_view digits) {
    if (digits.empty() || digits.size() > 9 || digits.front() == '0') return std::nullopt;
    std::uint32_t value = 0;
    for (char c : digits) {
        if (c < '0' || c > '9') return std::nullopt;
        value = value * 10 + static_cast<std::uint32_t>(c - '0');
    }
    return CweId(value);
}

std::optional<CweId> CweId::parse(std::string_view text) {
    constexpr std::string_view prefix = "CWE-";
    if (text.substr(0, prefix.size()) != prefix) return std::nullopt;
    return cwe_from_number_token(text.substr(prefix.size()));
}

CweId CweId::from_string(std::string_view text) {
    if (auto id = parse(text)) return *id;
    throw ValidationError("invalid CWE id: '" + std::string(text) + "'");
}

}  // namespace cvecwe
