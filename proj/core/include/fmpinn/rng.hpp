#pragma once

#include <cstdint>

namespace fmpinn {

/// Counter-based SplitMix64 generator.
///
/// Output i is a pure function of (seed, i), so streams are reproducible
/// across platforms and the full state is just the (seed, counter) pair,
/// which makes RNG snapshots in run records trivial. Substreams are derived
/// by remixing the seed with a stream tag.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t counter = 0)
        : seed_(seed), counter_(counter) {}

    std::uint64_t next_u64() {
        std::uint64_t z = seed_ + (++counter_) * golden;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1), 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in the open interval (lo, hi).
    double uniform_open(double lo, double hi) {
        double u = next_double();
        while (u == 0.0) u = next_double();
        return lo + u * (hi - lo);
    }

    /// Integer in [0, n). n is tiny everywhere this is used (face picks),
    /// so plain modulo is fine.
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

    /// Independent child stream; deterministic function of (seed, tag).
    Rng substream(std::uint64_t tag) const {
        std::uint64_t z = seed_ ^ (0x9E3779B97F4A7C15ull + tag * 0xD1342543DE82EF95ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return Rng(z ^ (z >> 31));
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t counter() const { return counter_; }

private:
    static constexpr std::uint64_t golden = 0x9E3779B97F4A7C15ull;
    std::uint64_t seed_;
    std::uint64_t counter_;
};

}  // namespace fmpinn
