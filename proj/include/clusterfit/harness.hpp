#ifndef CLUSTERFIT_HARNESS_HPP
#define CLUSTERFIT_HARNESS_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "clusterfit/datagen.hpp"
#include "clusterfit/estimator.hpp"
#include "clusterfit/funclass.hpp"
#include "clusterfit/targets.hpp"

namespace clusterfit::harness {

/// Monte Carlo estimate of the squared L2(P_X) distance between f_hat and
/// the target over fresh design draws. Needs n_test >= 1000.
double mspe(const std::function<double(std::span<const double>)>& f_hat,
            const targets::TargetFunction& target, const datagen::DesignSpec& design, long n_test,
            std::uint64_t seed);

struct EstimatorConfig {
    enum class Kind { Spline, Mlp };
    Kind kind = Kind::Spline;
    // spline
    int order = 3;
    double k_const = 1.0;
    int k_fixed = 0;         // > 0 pins the resolution; 0 = choose_k sizing
    double box_bound = 0.0;  // 0 = default log(n)
    // mlp
    double budget_const = 1.0;
    double beta = 0.0;  // 0 = target sup bound
    estimator::OptConfig opt;
};

struct DataConfig {
    datagen::DesignSpec design;
    datagen::ProcessSpec process;
    datagen::NoiseSpec noise;
};

struct SweepConfig {
    targets::TargetFunction target;
    std::vector<std::pair<long, long>> grid;  // (n, m) cells
    int replicates = 8;
    DataConfig data;
    EstimatorConfig est;
    long n_test = 4096;
    std::uint64_t seed = 1;
    int workers = 1;
    std::string echo;
};

struct SweepRow {
    long n = 0, m = 0;
    int replicate = 0;
    double mspe = 0.0;
    double wall_time_s = 0.0;
    double opt_gap = 0.0;
    bool flagged = false;  // divergent fit, excluded from medians
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::string config_echo;
    std::vector<std::pair<long, long>> cells;
    std::vector<double> median_mspe;  // per cell, over unflagged replicates
    double slope = 0.0;
    double slope_std_error = 0.0;
    bool slope_fitted = false;
    double theory_exponent = 0.0;  // -2r/(2r+1) from the target's rate model
    funclass::RateModel rate;
    long flagged_count = 0;
    // every cell has m below the predicted transition point; slope-vs-theory
    // comparisons are meaningful only in this regime
    bool sparse_regime = false;
};

/// Generates, fits and scores every (n, m, replicate) cell, then fits the
/// log-log slope of the median mspe against nm (needs >= 3 distinct nm and
/// positive medians).
SweepResult rate_sweep(const SweepConfig& config);

struct PlateauReport {
    std::vector<double> local_slopes;  // between consecutive m grid points
    double predicted_m_star = 0.0;
    double threshold = -0.25;
    bool plateau_found = false;
    double plateau_lo = 0.0, plateau_hi = 0.0;  // m bracket of the first flat slope
    double floor_ratio = 0.0;                   // median mspe at largest m, times n
};

struct PhaseScanConfig {
    SweepConfig base;  // grid ignored
    long n = 100;
    std::vector<long> m_grid;
    double threshold = -0.25;
};

/// Fixed-n scan across m with local log-log slopes and plateau detection:
/// the plateau onset is the first consecutive-m pair whose slope rises
/// above the threshold.
std::pair<SweepResult, PlateauReport> phase_scan(const PhaseScanConfig& config);

struct ApproxBenchConfig {
    targets::TargetFunction target;
    std::vector<std::pair<int, int>> sizes;  // (depth, width)
    long dense_count = 4000;
    estimator::OptConfig opt;
    double beta = 0.0;  // 0 = target sup bound
    long n_test = 4096;
    std::uint64_t seed = 1;
    int workers = 1;
    std::string echo;
};

struct ApproxBenchRow {
    int depth = 0, width = 0;
    long lw = 0;
    double best_risk = 0.0;  // training risk on the dense noiseless sample
    double sup_error = 0.0;
    double l2_error = 0.0;
    double reference = 0.0;  // (LW)^{-2 gamma} shape
    bool flagged = false;
};

struct ApproxBenchResult {
    std::vector<ApproxBenchRow> rows;
    double slope = 0.0;           // OLS on log best_risk vs log LW
    double endpoint_slope = 0.0;  // between the first and last size
    bool slope_fitted = false;
    double gamma = 0.0;
    std::string config_echo;
};

ApproxBenchResult approx_bench(const ApproxBenchConfig& config);

/// Reference curve values minimax_rate(n, m, ratio) scaled so the first
/// finite anchor matches; plots use exactly this so they cannot drift from
/// the calculator.
std::vector<double> reference_curve(const std::vector<std::pair<long, long>>& cells, double ratio,
                                    double anchor);

std::string sweep_to_csv(const SweepResult& result);
std::string phase_to_csv(const SweepResult& result, const PlateauReport& plateau);
std::string bench_to_csv(const ApproxBenchResult& result);

/// Executes the blocks of a JSON config file (generate / fit / gamma /
/// rate_sweep / phase_scan / approx_bench) and writes CSV tables and SVG
/// plots under out_dir. Returns the list of files written.
std::vector<std::string> run_config(const std::string& config_path, const std::string& out_dir,
                                    int workers);

}  // namespace clusterfit::harness

#endif
