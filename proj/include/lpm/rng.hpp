#pragma once

// Counter-style pseudo random streams.
//
// Every random draw in the library comes from a SplitMix64 stream whose seed
// is derived from (master seed, purpose tag, index) by the documented scheme
// in derive_seed().  Streams are cheap to construct (one 64-bit word), so the
// simulation engine can key an independent stream to every particle identity;
// that is what makes runs reproducible independently of the worker count and
// lets a pruned run stay coupled draw-for-draw with its exact counterpart.

#include <cmath>
#include <cstdint>
#include <string_view>

namespace lpm::rng {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// SplitMix64 finalizer (Vigna).  Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

// Documented stream-seed derivation: mix the master seed with the FNV-1a hash
// of the purpose tag, then mix in the stream index scaled by the golden-ratio
// increment.  Identical inputs give identical seeds on every platform.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                    std::uint64_t index) {
    const std::uint64_t tagged = mix64(master ^ fnv1a64(tag));
    return mix64(tagged ^ (kGolden * (index + 1)));
}

// SplitMix64 sequence generator.
class Stream {
  public:
    explicit constexpr Stream(std::uint64_t seed) : state_(seed) {}

    constexpr std::uint64_t next_u64() {
        state_ += kGolden;
        return mix64(state_);
    }

    // Uniform on (0, 1]; safe as a log() argument.
    double next_unit() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Uniform on [0, 1).
    double next_unit_open() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Box-Muller pair; two normals per log/sqrt/sincos.
    void next_normal_pair(double& a, double& b) {
        const double u1 = next_unit();
        const double u2 = next_unit_open();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 6.283185307179586476925287 * u2;
        a = r * std::cos(t);
        b = r * std::sin(t);
    }

    // Caches the second normal of the pair, halving the per-draw cost for
    // consumers that pull normals one at a time.
    double next_normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double a, b;
        next_normal_pair(a, b);
        spare_ = b;
        has_spare_ = true;
        return a;
    }

    double next_exponential(double rate = 1.0) { return -std::log(next_unit()) / rate; }

    // Poisson by Knuth's product method; lambda is split in halves until small
    // enough, which keeps the method exact for any rate.
    std::uint64_t next_poisson(double lambda) {
        std::uint64_t n = 0;
        while (lambda > 30.0) {
            lambda *= 0.5;
            n += next_poisson(lambda);
        }
        const double limit = std::exp(-lambda);
        double p = next_unit_open();
        std::uint64_t k = 0;
        while (p > limit) {
            ++k;
            p *= next_unit_open();
        }
        return n + k;
    }

    // Geometric on {1, 2, ...} with P(k) = p (1-p)^{k-1}.
    std::uint64_t next_geometric1(double p) {
        const double u = next_unit();
        if (u >= 1.0 || p >= 1.0) return 1;
        const double k = std::floor(std::log(u) / std::log1p(-p));
        return 1 + static_cast<std::uint64_t>(k);
    }

  private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace lpm::rng

namespace lpm {
using rng::derive_seed;
using rng::fnv1a64;
using rng::kGolden;
using rng::mix64;
using rng::Stream;
}  // namespace lpm
