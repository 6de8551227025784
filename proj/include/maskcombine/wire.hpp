#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "maskcombine/core.hpp"

namespace maskcombine::wire {

using Json = nlohmann::json;

inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t hash = 0xcbf29ce484222325ULL) {
    for (unsigned char byte : bytes) {
        hash ^= byte;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

// FNV-1a 64 over the tokens joined with single spaces, as 16 hex digits.
inline std::string transcript_hash(std::span<const std::string> tokens) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) {
            hash = fnv1a64(" ", hash);
        }
        hash = fnv1a64(tokens[i], hash);
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

// Shortest decimal that parses back to the same double.
inline std::string format_decimal(double value) {
    std::array<char, 32> buf{};
    const auto result = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (result.ec != std::errc{}) {
        throw Error(ErrorCategory::Io, "cannot format number");
    }
    return std::string(buf.data(), result.ptr);
}

inline std::string quote(std::string_view text) {
    try {
        return Json(std::string(text)).dump();
    } catch (const Json::exception &e) {
        throw Error(ErrorCategory::Parse, std::string("token is not valid UTF-8: ") + e.what());
    }
}

inline std::string format_row(const std::array<double, kNumClasses> &row) {
    std::string out = "[";
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        if (c > 0) {
            out += ',';
        }
        out += format_decimal(row[c]);
    }
    out += ']';
    return out;
}

inline std::string format_tokens(std::span<const std::string> tokens) {
    std::string out = "[";
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) {
            out += ',';
        }
        out += quote(tokens[i]);
    }
    out += ']';
    return out;
}

inline std::string format_class_order() {
    std::string out = "[";
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        if (c > 0) {
            out += ',';
        }
        out += quote(kWireClassOrder[c]);
    }
    out += ']';
    return out;
}

// ─── Reading ─────────────────────────────────────────────────────────────────

inline bool is_blank(std::string_view line) {
    return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

inline Json parse_line(const std::string &line, std::size_t line_no) {
    try {
        Json value = Json::parse(line);
        if (!value.is_object()) {
            throw ParseError(line_no, "expected a JSON object");
        }
        return value;
    } catch (const Json::parse_error &e) {
        throw ParseError(line_no, std::string("malformed JSON: ") + e.what());
    }
}

inline const Json &require(const Json &object, const char *key, std::size_t line_no) {
    const auto it = object.find(key);
    if (it == object.end()) {
        throw ParseError(line_no, std::string("missing field '") + key + "'");
    }
    return *it;
}

inline std::size_t as_index(const Json &value, const char *key, std::size_t line_no) {
    if (!value.is_number_unsigned() && !(value.is_number_integer() && value.get<std::int64_t>() >= 0)) {
        throw ParseError(line_no, std::string("field '") + key + "' must be a non-negative integer");
    }
    return value.get<std::size_t>();
}

inline std::vector<std::string> as_tokens(const Json &value, std::size_t line_no) {
    if (!value.is_array()) {
        throw ParseError(line_no, "field 'tokens' must be an array of strings");
    }
    std::vector<std::string> tokens;
    tokens.reserve(value.size());
    for (const Json &t : value) {
        if (!t.is_string()) {
            throw ParseError(line_no, "field 'tokens' must be an array of strings");
        }
        tokens.push_back(t.get<std::string>());
    }
    return tokens;
}

// A four-entry probability row; checked against the simplex tolerance but
// kept exactly as written.
inline std::array<double, kNumClasses> as_row(const Json &value, std::size_t line_no) {
    if (!value.is_array() || value.size() != kNumClasses) {
        throw ParseError(line_no, "probability rows must have exactly 4 entries");
    }
    std::array<double, kNumClasses> row{};
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        if (!value[c].is_number()) {
            throw ParseError(line_no, "probability entries must be numbers");
        }
        row[c] = value[c].get<double>();
    }
    try {
        (void)Distribution::from_probs(row);
    } catch (const Error &e) {
        throw ParseError(line_no, e.what());
    }
    return row;
}

inline void check_class_order(const Json &header, std::size_t line_no) {
    const Json &order = require(header, "class_order", line_no);
    bool ok = order.is_array() && order.size() == kNumClasses;
    for (std::size_t c = 0; ok && c < kNumClasses; ++c) {
        ok = order[c].is_string() && order[c].get<std::string>() == kWireClassOrder[c];
    }
    if (!ok) {
        throw ParseError(line_no, "class_order must be [\"O\",\"COMMA\",\"PERIOD\",\"QUESTION\"], got " +
                                      order.dump());
    }
}

inline std::string as_hash(const Json &header, std::size_t line_no) {
    const Json &hash = require(header, "transcript_hash", line_no);
    if (!hash.is_string()) {
        throw ParseError(line_no, "transcript_hash must be a string");
    }
    return hash.get<std::string>();
}

} // namespace maskcombine::wire
