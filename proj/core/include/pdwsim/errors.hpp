#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pdwsim {

/// Invalid or inconsistent simulation configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller broke a documented precondition (e.g. unsorted merge input).
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Malformed train file. Carries the byte offset where decoding failed.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& path, std::uint64_t offset, const std::string& what)
        : std::runtime_error(path + ": byte offset " + std::to_string(offset) + ": " + what),
          path_(path),
          offset_(offset) {}

    const std::string& path() const noexcept { return path_; }
    std::uint64_t offset() const noexcept { return offset_; }

private:
    std::string path_;
    std::uint64_t offset_;
};

/// Filesystem failure; the message always names the offending path.
class IoError : public std::runtime_error {
public:
    IoError(const std::string& path, const std::string& what)
        : std::runtime_error(path + ": " + what), path_(path) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// Truth and prediction data do not line up.
class MismatchError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace pdwsim
