#ifndef CLUSTERFIT_ESTIMATOR_HPP
#define CLUSTERFIT_ESTIMATOR_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "clusterfit/datagen.hpp"
#include "clusterfit/relunet.hpp"

namespace clusterfit::estimator {

/// Bookkeeping for one fit. `best_restart_risk` is the lowest checkpointed
/// risk seen across every restart, including restarts later discarded for
/// divergence; `optimization_gap` is the returned fit's risk minus that
/// minimum, a computable surrogate for the distance to the global empirical
/// minimum.
struct FitReport {
    double final_risk = 0.0;
    double best_restart_risk = 0.0;
    double optimization_gap = 0.0;
    int restarts = 1;
    int discarded_restarts = 0;
    std::vector<double> loss_trace;  // per epoch (chosen restart) or per PGD iteration
    double wall_time_s = 0.0;
    std::string config_echo;
};

/// Tensor-product cardinal B-spline fit with box-constrained coefficients.
/// Coefficients are indexed by multi-indices l in prod_j {-r+1, ..., k},
/// flattened row-major; per dimension there are k+r of them.
struct SplineModel {
    int order = 2;       // r >= 1
    int resolution = 1;  // k >= 1
    int d = 1;
    double box_bound = 0.0;
    std::vector<double> coeff;  // (k+r)^d

    double operator()(std::span<const double> x) const;
    long coeff_count() const;
    void validate() const;
};

/// (1/nm) sum_ij (Y_ij - f(X_ij))^2.
double empirical_risk(const std::function<double(std::span<const double>)>& f,
                      const datagen::Dataset& data);
double empirical_risk(const relunet::MLP& net, const datagen::Dataset& data);
double empirical_risk(const SplineModel& model, const datagen::Dataset& data);

/// Cardinal B-spline of order r: the closed form
/// (1/(r-1)!) sum_{i=0..r} (-1)^i C(r,i) (x-i)_+^{r-1}; the indicator of
/// [0,1) for r = 1. Zero outside [0, r].
double bspline_1d(int r, double x);

/// prod_j B_r(k x_j - l_j).
double tensor_bspline(int k, std::span<const int> l, std::span<const double> x, int r);

struct Arch {
    int depth = 1;
    int width = 1;
    double beta = 1.0;
};

struct OptConfig {
    enum class Method { Adam, Gd };
    Method method = Method::Adam;
    double learning_rate = 1e-3;
    int epochs = 2000;
    int batch_size = 64;
    int restarts = 1;
    int patience = 0;  // epochs without improvement before stopping; 0 = off
    std::uint64_t seed = 1;
};

struct ErmFit {
    relunet::MLP net;
    FitReport report;
};

/// Pooled least squares over truncated ReLU nets: `restarts` independent
/// trainings from init(seed + r); the net with the lowest checkpointed
/// empirical risk is returned (lowest restart index on ties). Restarts that
/// diverge to a non-finite loss are discarded and counted; all restarts
/// diverging is an error.
ErmFit fit_erm(const Arch& arch, const datagen::Dataset& data, const OptConfig& opt);

/// One training run from an explicit starting net (restarts in `opt` are
/// ignored). Checkpointing includes the starting point, so the result never
/// risks more than the initial net.
ErmFit fit_erm_from(const relunet::MLP& start, const datagen::Dataset& data, const OptConfig& opt);

struct SplineFit {
    SplineModel model;
    FitReport report;
};

/// Pooled least squares over the box-constrained spline class by projected
/// gradient descent on the convex quadratic (projection = coordinatewise
/// clamp to [-box_bound, box_bound]). The objective is nonincreasing per
/// iteration and converges to the constrained optimum.
SplineFit fit_spline(const datagen::Dataset& data, int k, int r, double box_bound);

/// floor(c * (nm)^{1/(2s+d)} * (log nm)^{-3/(2s+d)}), clamped below at 1.
int choose_k(long n, long m, double s, int d, double c = 1.0);

}  // namespace clusterfit::estimator

#endif
