#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace maskcombine {

// Machine-readable failure classes. The CLI maps each to its own exit code.
enum class ErrorCategory {
    Usage,     // bad command line
    Config,    // decoding parameters violate an invariant
    Parse,     // malformed input file
    Geometry,  // provider and window plan disagree
    Coverage,  // a word received no prediction
    Provider,  // provider returned invalid output
    Io,        // file could not be opened or written
};

constexpr std::string_view to_string(ErrorCategory category) {
    switch (category) {
    case ErrorCategory::Usage: return "usage";
    case ErrorCategory::Config: return "config";
    case ErrorCategory::Parse: return "parse";
    case ErrorCategory::Geometry: return "geometry";
    case ErrorCategory::Coverage: return "coverage";
    case ErrorCategory::Provider: return "provider";
    case ErrorCategory::Io: return "io";
    }
    return "unknown";
}

constexpr int exit_code(ErrorCategory category) {
    switch (category) {
    case ErrorCategory::Usage: return 2;
    case ErrorCategory::Config: return 3;
    case ErrorCategory::Parse: return 4;
    case ErrorCategory::Geometry: return 5;
    case ErrorCategory::Coverage: return 6;
    case ErrorCategory::Provider: return 7;
    case ErrorCategory::Io: return 8;
    }
    return 1;
}

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string &message)
        : std::runtime_error(message), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

// Parse failure tied to a 1-based line of the offending file.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string &message)
        : Error(ErrorCategory::Parse, "line " + std::to_string(line) + ": " + message),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace maskcombine
