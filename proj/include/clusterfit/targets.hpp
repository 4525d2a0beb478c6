#ifndef CLUSTERFIT_TARGETS_HPP
#define CLUSTERFIT_TARGETS_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "clusterfit/funclass.hpp"

namespace clusterfit::targets {

/// A ground-truth mean function with certified membership in its smoothness
/// regime. `eval` is total on [0,1]^d, pure, and bounded by spec.sup_bound.
struct TargetFunction {
    funclass::SmoothnessSpec spec;
    std::function<double(std::span<const double>)> eval;
    std::string description;

    double operator()(std::span<const double> x) const { return eval(x); }
};

/// Chart [0,1]^{d_M} -> [0,1]^d for one of the library curves.
struct ManifoldEmbedding {
    int intrinsic_dim = 1;
    int ambient_dim = 2;
    std::string name;
    std::function<std::vector<double>(std::span<const double>)> chart;
};

/// x -> amplitude * (1/d) sum_j |x_j - c_j|^s with explicit centers.
/// Exactly Hölder-s for s in (0,1]; the empirical quotient bound is
/// amplitude * d^{-s/2}.
TargetFunction make_kink(double s, int d, const std::vector<double>& centers, double amplitude);

/// Certified member of C^s([0,1]^d). For s <= 1 a kink sum with seed-drawn
/// centers in [0.25, 0.75]; for s > 1 a seed-drawn finite trigonometric sum
/// whose C^s norm is certified by an explicit coefficient bound.
TargetFunction make_isotropic(double s, int d, double amplitude, std::uint64_t seed);

/// Tensor-sum construction amplitude * (1/d) sum_j g_{s_j}(x_j); membership
/// in the anisotropic class follows coordinatewise. Needs length >= 2.
TargetFunction make_anisotropic(const std::vector<double>& s_vec, double amplitude, std::uint64_t seed);

/// Recursively builds the composition: each node applies a smoothness-s
/// primitive mapped into [0,1] so inner compositions stay in domain; leaves
/// select input coordinates through a seed-drawn (possibly repeating) map.
/// Output range is within [-amplitude, amplitude].
TargetFunction synthesize_composition(const funclass::CompositionTree& tree, int d, double amplitude,
                                      std::uint64_t seed);

/// Library curves: "circle-in-square" (d_M=1, d=2) and "helix-in-cube"
/// (d_M=1, d=3). Unknown names are rejected.
ManifoldEmbedding embed_manifold(const std::string& name, int d);

/// Rewraps an isotropic target as manifold-supported with intrinsic
/// dimension d_m (the rate then uses s/d_M).
TargetFunction with_manifold_regime(TargetFunction target, int d_m);

}  // namespace clusterfit::targets

#endif
