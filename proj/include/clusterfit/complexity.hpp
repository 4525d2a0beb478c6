#ifndef CLUSTERFIT_COMPLEXITY_HPP
#define CLUSTERFIT_COMPLEXITY_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace clusterfit::complexity {

/// Finite stand-in for the candidate class: the supremum inside a Rademacher
/// average is exact over these members. `reference` plays the role of the
/// target the deviations are measured against.
struct Dictionary {
    std::vector<std::function<double(std::span<const double>)>> members;
    std::function<double(std::span<const double>)> reference;
    std::string label;
};

struct RademacherEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

/// Monte Carlo over sign draws of
/// E[ sup_f | (1/nm) sum_ij sigma_ij (f - ref)(X_ij) | ].
/// `xs` holds nm points of dimension d, flattened.
RademacherEstimate rademacher_average(const Dictionary& dict, std::span<const double> xs, long nm, int d,
                                      long draws, std::uint64_t seed);

/// Keeps members whose Monte Carlo squared L2(P_X) distance to the reference
/// is at most radius. `px` must hold at least 10^4 points for a stable
/// distance estimate. The result may be empty.
Dictionary localize(const Dictionary& dict, double radius, std::span<const double> px, int d);

/// Smallest grid r with phi(r) <= r, refined by bisection on the
/// log-linearly interpolated phi. Errors when no grid point crosses.
double fixed_point(const std::vector<double>& r_grid, const std::vector<double>& phi);

/// Estimation-error shape of the network-size bound: with iota =
/// b1^2 + b2^2 (log n)^2 + b3^2 (log nm)^2, returns
/// (b1^2+b2^2)/n + L^2 W^2 log(LW) iota log(nm) / nm. Needs log(LW) >= 1.
/// Universal constants are set to 1: this is a shape, not a certified bound.
double vc_size_bound(double depth, double width, long n, long m, double b1, double b2, double b3);

/// Oracle-inequality shape: approx_err + (b1^2+b2^2)/n + (r* + 1/nm) iota.
double oracle_bound(double approx_err, long n, long m, double r_star, double b1, double b2, double b3);

struct ComplexityReport {
    std::vector<double> r_grid;
    std::vector<double> phi;
    std::vector<double> std_error;
    double fixed_point_r = 0.0;
    bool fixed_point_found = false;
    long draws = 0;
    std::string label;
};

/// Sweeps the localized Rademacher average over a grid (log-spaced over
/// [1e-6, 4 b1^2] by default) and locates the empirical fixed point.
ComplexityReport complexity_profile(const Dictionary& dict, std::span<const double> xs, long nm, int d,
                                    std::span<const double> px, double b1, long draws, std::uint64_t seed,
                                    const std::vector<double>& grid = {});

/// CSV rows "r,phi_hat,stderr" with the fixed point echoed in a footer row.
std::string to_csv(const ComplexityReport& report);

}  // namespace clusterfit::complexity

#endif
