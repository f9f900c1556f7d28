#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sscd {

// Bad input supplied by the user: malformed files, invalid parameters,
// missing paths. The CLI maps these to exit code 1; anything else is an
// internal error (exit code 2).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A line-oriented text input (manifest, CSV, JSONL) failed to parse.
class ParseError : public InputError {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : InputError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// A binary file (embedding cache, serialized index) is corrupt or truncated.
class FormatError : public InputError {
public:
    FormatError(const std::string& source, std::uint64_t offset, const std::string& what)
        : InputError(source + " @ byte " + std::to_string(offset) + ": " + what),
          offset_(offset) {}

    [[nodiscard]] std::uint64_t offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

// Remote embedding service failures (unreachable, bad payload).
class ServiceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace sscd
