#pragma once

#include <cstdint>
#include <cmath>
#include <random>

namespace corrmc {

/// Deterministic random stream.
///
/// Wraps std::mt19937_64 with fixed, hand-specified output mappings so that a
/// given seed produces the same sequence of doubles on every platform and at
/// every optimization level.  The standard distribution classes are avoided
/// on purpose: their algorithms are implementation-defined and would break
/// cross-toolchain reproducibility of seeded experiments.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via the Box-Muller transform (pairs are cached).
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        // Guard the log: uniform01() can return exactly 0.
        while (u1 <= 0.0) {
            u1 = uniform01();
        }
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.283185307179586476925286766559 * u2;
        cached_ = radius * std::sin(angle);
        has_cached_ = true;
        return radius * std::cos(angle);
    }

    /// Raw 64-bit draw (exposed for integer helpers).
    std::uint64_t bits() { return engine_(); }

private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

/// One round of the splitmix64 mixer.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Stream purposes used when deriving per-trial seeds.  Keeping the purposes
/// distinct guarantees that the instance, its prior perturbation, and the
/// sampled mask are statistically independent, while every method sees the
/// same (instance, prior, mask) triple for a given (grid index, trial) pair.
enum class StreamPurpose : std::uint64_t {
    instance = 1,
    prior_noise = 2,
    mask = 3,
};

/// Derive a child seed from a root seed, a grid index, a trial index, and a
/// stream purpose.  Pure function of its arguments.
inline std::uint64_t derive_seed(std::uint64_t root,
                                 std::uint64_t grid_index,
                                 std::uint64_t trial,
                                 StreamPurpose purpose) {
    std::uint64_t h = splitmix64(root);
    h = splitmix64(h ^ (0x1000000000000001ULL * (grid_index + 1)));
    h = splitmix64(h ^ (0x2000000000000003ULL * (trial + 1)));
    h = splitmix64(h ^ (0x4000000000000007ULL * static_cast<std::uint64_t>(purpose)));
    return h;
}

} // namespace corrmc
