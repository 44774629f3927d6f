#pragma once

// Small helpers for the plain-text formats (config, sidecars, manifests,
// score reports): round-trip number formatting and `key = value` parsing.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "pdwsim/errors.hpp"

namespace pdwsim::text {

/// Shortest representation that parses back to the same value. Floating
/// values of ordinary magnitude avoid exponent notation ("200000", not "2e+05").
template <typename T>
std::string format(T value) {
    if constexpr (std::is_same_v<T, bool>) {
        return value ? "true" : "false";
    } else if constexpr (std::is_floating_point_v<T>) {
        char buf[512];
        const T mag = value < 0 ? -value : value;
        const bool plain = mag == 0 || (mag >= T(1e-4) && mag < T(1e15));
        auto [end, ec] = plain ? std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed)
                               : std::to_chars(buf, buf + sizeof buf, value);
        return std::string(buf, end);
    } else {
        char buf[32];
        auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
        return std::string(buf, end);
    }
}

/// Parses the whole string or throws ConfigError.
template <typename T>
T parse(std::string_view s) {
    if constexpr (std::is_same_v<T, bool>) {
        if (s == "true" || s == "1") return true;
        if (s == "false" || s == "0") return false;
        throw ConfigError("expected true or false, got '" + std::string(s) + "'");
    } else {
        T value{};
        auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
        if (ec != std::errc{} || end != s.data() + s.size() || s.empty()) {
            throw ConfigError("malformed number '" + std::string(s) + "'");
        }
        return value;
    }
}

std::string_view trim(std::string_view s);

struct KeyValue {
    std::string key;
    std::string value;
    std::size_t line = 0;  ///< 1-based
};

/// `key = value` lines; blank lines and '#' comments are skipped. Throws
/// ConfigError naming the line on a missing '=' or a duplicate key.
std::vector<KeyValue> parse_key_values(std::string_view body);

/// Throws IoError naming the path.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace pdwsim::text
