#pragma once

#include <cstdint>
#include <random>

namespace rqrao {

namespace detail {

// splitmix64 finalizer; used both as a generator step and as a seed mixer.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace detail

/// Seed stream with explicit splitting. Substreams are derived by mixing
/// integer tags into the parent seed, so the stream reached by a given
/// sequence of tags is independent of evaluation order or thread schedule.
class RngStream {
public:
    RngStream() : seed_(0) {}
    explicit RngStream(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    /// Derive the substream identified by `tag`.
    RngStream child(std::uint64_t tag) const {
        std::uint64_t s = seed_ ^ (0x9e3779b97f4a7c15ULL * (tag + 1));
        return RngStream(detail::splitmix64(s));
    }
    RngStream child(std::uint64_t a, std::uint64_t b) const { return child(a).child(b); }
    RngStream child(std::uint64_t a, std::uint64_t b, std::uint64_t c) const {
        return child(a).child(b).child(c);
    }

    /// Materialize an engine positioned at the start of this stream.
    std::mt19937_64 engine() const {
        std::uint64_t s = seed_;
        return std::mt19937_64(detail::splitmix64(s));
    }

private:
    std::uint64_t seed_;
};

/// Stateful wrapper used by the sampling-heavy code paths.
class Rng {
public:
    explicit Rng(RngStream stream) : engine_(stream.engine()) {}
    explicit Rng(std::uint64_t seed) : engine_(RngStream(seed).engine()) {}

    std::mt19937_64& engine() { return engine_; }

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }
    double uniform01() { return uniform(0.0, 1.0); }
    double gaussian() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
    /// Uniform integer in [0, n).
    std::uint64_t index(std::uint64_t n) {
        return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
    }
    bool coin() { return index(2) == 1; }
    int pm1() { return coin() ? 1 : -1; }

private:
    std::mt19937_64 engine_;
};

} // namespace rqrao
