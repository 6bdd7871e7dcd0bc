// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cvecwe {

// Root of every error the library throws. The CLI maps IoError to exit
// code 2 and every other Error to exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input text. line is 1-based; offset is a byte offset (0-based)
// into the source or into the offending line, whichever the parser tracks.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t offset)
        : Error(what + " (line " + std::to_string(line) + ", offset " + std::to_string(offset) + ")"),
          line_(line),
          offset_(offset) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t line_;
    std::size_t offset_;
};

// Input parsed but violates a structural rule (cycles, duplicates).
class StructuralError : public Error {
public:
    using Error::Error;
};

// Contract violation on arguments or configuration.
class ValidationError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Optimizer diverged (non-finite loss).
class TrainingError : public Error {
public:
    using Error::Error;
};

}  // namespace cvecwe
