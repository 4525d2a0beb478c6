#ifndef CLUSTERFIT_RNG_HPP
#define CLUSTERFIT_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>

namespace clusterfit {

// splitmix64: small state, fast, identical sequences on every platform.
// std::mt19937 + std:: distributions are avoided on purpose: the standard
// leaves distribution algorithms implementation-defined, which would break
// byte-identical reproducibility across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller. No cached spare, so the stream
    /// position depends only on the call count.
    double normal() {
        double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Mean-zero Laplace with the given scale (= b in exp(-|x|/b)/2b).
    double laplace(double scale) {
        double u = uniform() - 0.5;
        double mag = -std::log1p(-2.0 * std::abs(u));
        return (u < 0.0 ? -scale : scale) * mag;
    }

    /// Uniform integer in {0, ..., n-1}.
    int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

    int sign() { return (next_u64() & 1u) ? 1 : -1; }

private:
    std::uint64_t state_;
};

/// Derives an independent stream key from (seed, a, b). Subject i's draws
/// depend only on (seed, i, role), so growing a dataset never perturbs
/// draws already made for earlier subjects.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    auto mix = [](std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    std::uint64_t h = mix(seed + 0x9e3779b97f4a7c15ULL);
    h = mix(h ^ (a + 0xbf58476d1ce4e5b9ULL));
    h = mix(h ^ (b + 0x94d049bb133111ebULL));
    return h;
}

}  // namespace clusterfit

#endif
