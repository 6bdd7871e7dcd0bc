// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace cvecwe {

// A CWE identifier such as "CWE-787". Stored as its numeric component so
// ordering is numeric (CWE-79 < CWE-787) and the canonical spelling is
// always recoverable.
class CweId {
public:
    constexpr CweId() = default;
    explicit constexpr CweId(std::uint32_t number) : number_(number) {}

    // Accepts exactly "CWE-" followed by a positive decimal integer without
    // leading zeros. Returns nullopt for anything else.
    static std::optional<CweId> parse(std::string_view text);

    // Like parse, but throws ValidationError naming the token.
    static CweId from_string(std::string_view text);

    constexpr std::uint32_t number() const noexcept { return number_; }
    std::string str() const { return "CWE-" + std::to_string(number_); }

    friend constexpr auto operator<=>(CweId, CweId) = default;

private:
    std::uint32_t number_ = 0;
};

// Parses a bare positive decimal number ("787") with the same rules as the
// numeric part of CweId::parse.
std::optional<CweId> cwe_from_number_token(std::string_view digits);

}  // namespace cvecwe

template <>
struct std::hash<cvecwe::CweId> {
    std::size_t operator()(cvecwe::CweId id) const noexcept { return std::hash<std::uint32_t>{}(id.number()); }
};
