#include "pdwsim/random.hpp"

#include <cmath>
#include <numbers>

namespace pdwsim {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t fnv1a(std::string_view text) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) noexcept {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

Seed::Seed(std::uint64_t master) : master_(master), key_(mix64(master ^ 0x5EED5EED5EED5EEDULL)) {}

std::string Seed::to_string() const {
    std::string out = std::to_string(master_);
    for (const auto& step : path_) {
        out += '/';
        out += step.scope;
        out += ':';
        out += std::to_string(step.index);
    }
    return out;
}

Seed derive_seed(const Seed& parent, std::string_view scope, std::uint64_t index) {
    Seed child = parent;
    child.path_.push_back({std::string(scope), index});
    const std::uint64_t salt = mix64(fnv1a(scope) ^ mix64(index + kGolden));
    child.key_ = mix64(parent.key_ + kGolden * (salt | 1ULL));
    return child;
}

std::uint64_t Rng::next_u64() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * kGolden);
}

double Rng::uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * uniform();
}

double Rng::log_uniform(double lo, double hi) noexcept {
    return std::exp(uniform(std::log(lo), std::log(hi)));
}

std::uint64_t Rng::uniform_index(std::uint64_t n) noexcept {
    if (n == 0) return 0;
    // Rejection on the top of the range keeps the result exactly uniform.
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % n;
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) noexcept {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(uniform_index(span));
}

double Rng::normal() noexcept {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace pdwsim
