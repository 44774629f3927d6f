#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace pdwsim {

struct SeedStep {
    std::string scope;
    std::uint64_t index = 0;

    friend bool operator==(const SeedStep&, const SeedStep&) = default;
};

/// A master seed plus the derivation path that led to a particular substream.
/// The stream key is a pure function of (master, path), computed with integer
/// arithmetic only, so it is identical on every platform.
class Seed {
public:
    explicit Seed(std::uint64_t master = 0);

    std::uint64_t master() const noexcept { return master_; }
    const std::vector<SeedStep>& path() const noexcept { return path_; }
    std::uint64_t key() const noexcept { return key_; }

    /// "master/scope:index/..." for logs and manifests.
    std::string to_string() const;

    friend bool operator==(const Seed&, const Seed&) = default;

private:
    friend Seed derive_seed(const Seed& parent, std::string_view scope, std::uint64_t index);

    std::uint64_t master_;
    std::vector<SeedStep> path_;
    std::uint64_t key_;
};

Seed derive_seed(const Seed& parent, std::string_view scope, std::uint64_t index);

/// Counter-based generator: draw n is mix(key, n). No hidden state besides the
/// counter, so any draw can be addressed directly with seek().
///
/// Distributions are implemented here rather than with <random> because the
/// standard distributions are not specified bit-for-bit across library
/// implementations.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(const Seed& seed) noexcept : key_(seed.key()) {}
    explicit Rng(std::uint64_t key) noexcept : key_(key) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return next_u64(); }
    std::uint64_t next_u64() noexcept;

    std::uint64_t counter() const noexcept { return counter_; }
    void seek(std::uint64_t counter) noexcept { counter_ = counter; }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept;
    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) noexcept;
    /// Log-uniform in [lo, hi); both bounds must be positive.
    double log_uniform(double lo, double hi) noexcept;
    /// Uniform integer in [0, n). Returns 0 when n == 0.
    std::uint64_t uniform_index(std::uint64_t n) noexcept;
    /// Uniform integer in [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) noexcept;
    /// Standard normal via Box-Muller. Always consumes exactly two draws.
    double normal() noexcept;
    double normal(double mean, double sigma) noexcept { return mean + sigma * normal(); }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace pdwsim
