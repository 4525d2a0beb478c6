#ifndef CLUSTERFIT_FUNCLASS_HPP
#define CLUSTERFIT_FUNCLASS_HPP

#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

namespace clusterfit::funclass {

/// Tree of (smoothness, arity) nodes describing a hierarchical composition
/// class. Leaves act directly on selected input coordinates; an internal
/// node applies its own function to the outputs of its `arity` children.
struct CompositionTree {
    double s = 1.0;  // Hölder smoothness of the node function
    int arity = 1;   // K: number of arguments the node function takes
    std::vector<CompositionTree> children;  // empty for a leaf, else exactly `arity`

    void validate() const;
    int node_count() const;
    int height() const;
};

struct Isotropic {
    double s = 1.0;
    int d = 1;
};
struct Anisotropic {
    std::vector<double> s_vec;  // length d >= 2, all entries > 0
};
struct Composition {
    CompositionTree tree;
    int d = 1;
};
struct Manifold {
    double s = 1.0;
    int d = 1;    // ambient dimension
    int d_m = 1;  // intrinsic dimension, <= d
};

/// Which regularity regime a target lives in, plus the bounds that the
/// generators certify: M (Hölder-norm bound) and b1 (sup bound).
struct SmoothnessSpec {
    std::variant<Isotropic, Anisotropic, Composition, Manifold> regime;
    double holder_norm_bound = 1.0;  // M
    double sup_bound = 1.0;          // b1

    int dim() const;
    void validate() const;
};

/// The exponent driving a minimax rate plus the log-factor power we report
/// alongside it. The log power is display-only: desk-scale experiments
/// cannot resolve logarithmic factors, so it never enters a pass/fail test.
struct RateModel {
    double exponent_ratio = 1.0;  // s/d, s~/d, gamma, or s/d_M
    double log_power = 0.0;
};

/// d / sum_i 1/s_i. Requires length >= 2 (the anisotropic definition).
double harmonic_mean(const std::vector<double>& s_vec);

/// Smoothness of the addressed node discounted by prod min(1, s') over its
/// ancestors. `node_path` is a list of child indices from the root; an empty
/// path addresses the root.
double effective_smoothness(const CompositionTree& tree, const std::vector<int>& node_path);

/// min over all nodes of (effective smoothness / arity).
double gamma_direct(const CompositionTree& tree);

/// Same quantity by the bottom-up recursion
/// gamma = min(s/K, min_k gamma_k * min(1, s)); base case s/K.
/// Agrees with gamma_direct exactly (both sides perform the same arithmetic).
double gamma_recursive(const CompositionTree& tree);

/// Rate exponent and log power for a smoothness regime.
RateModel rate_model(const SmoothnessSpec& spec);

/// n^{-1} + (nm)^{-2r/(2r+1)}. Log factors are reported separately by
/// RateModel, never multiplied in.
double minimax_rate(long n, long m, double ratio);

/// Sampling frequency where the (nm)-rate meets the n^{-1} floor: n^{1/(2r)}.
double phase_transition_m(long n, double ratio);

/// floor(c * (nm)^{1/(4r+2)} * (log nm)^{-4/(2r+1)}), clamped below at 3.
/// Requires nm >= 3.
long network_budget(long n, long m, double ratio, double c = 1.0);

}  // namespace clusterfit::funclass

#endif
