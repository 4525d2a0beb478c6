#include "clusterfit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "clusterfit/relunet.hpp"
#include "clusterfit/rng.hpp"
#include "clusterfit/serialize.hpp"
#include "clusterfit/svg.hpp"

namespace clusterfit::harness {

namespace {

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

/// Index-addressed parallel map: results land by job index, so output is
/// identical for any worker count.
void run_jobs(long count, int workers, const std::function<void(long)>& job) {
    workers = std::max(1, workers);
    if (workers == 1 || count <= 1) {
        for (long i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<long> next{0};
    std::vector<std::thread> pool;
    int spawn = static_cast<int>(std::min<long>(workers, count));
    pool.reserve(spawn);
    for (int w = 0; w < spawn; ++w)
        pool.emplace_back([&] {
            for (;;) {
                long i = next.fetch_add(1);
                if (i >= count) return;
                job(i);
            }
        });
    for (auto& t : pool) t.join();
}

double median_of(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

struct OlsFit {
    double slope = 0.0, intercept = 0.0, slope_se = 0.0;
};

OlsFit ols(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    OlsFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (n > 2) {
        double rss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double r = y[i] - fit.intercept - fit.slope * x[i];
            rss += r * r;
        }
        fit.slope_se = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
    }
    return fit;
}

struct CellFit {
    double mspe = std::numeric_limits<double>::quiet_NaN();
    double opt_gap = 0.0;
    double wall = 0.0;
    bool ok = false;
};

CellFit fit_cell(const targets::TargetFunction& target, const funclass::RateModel& rate, long n, long m,
                 const DataConfig& data_cfg, const EstimatorConfig& est, long n_test,
                 std::uint64_t job_seed, std::uint64_t opt_seed) {
    CellFit out;
    double t0 = now_seconds();
    try {
        datagen::Dataset ds = datagen::generate_dataset(target, n, m, data_cfg.design, data_cfg.process,
                                                        data_cfg.noise, mix_seed(job_seed, 0xDA7A, 0));
        std::function<double(std::span<const double>)> f_hat;
        if (est.kind == EstimatorConfig::Kind::Spline) {
            int d = target.spec.dim();
            double s_eff = rate.exponent_ratio * static_cast<double>(d);
            int k = est.k_fixed > 0 ? est.k_fixed : estimator::choose_k(n, m, s_eff, d, est.k_const);
            double box = est.box_bound > 0.0 ? est.box_bound : std::log(static_cast<double>(n));
            auto fit = estimator::fit_spline(ds, k, est.order, box);
            out.opt_gap = fit.report.optimization_gap;
            auto model = std::make_shared<estimator::SplineModel>(std::move(fit.model));
            f_hat = [model](std::span<const double> x) { return (*model)(x); };
        } else {
            long budget = funclass::network_budget(n, m, rate.exponent_ratio, est.budget_const);
            auto [depth, width] = relunet::expand_budget(budget);
            estimator::Arch arch{depth, width, est.beta > 0.0 ? est.beta : target.spec.sup_bound};
            estimator::OptConfig opt = est.opt;
            opt.seed = opt_seed;
            auto fit = estimator::fit_erm(arch, ds, opt);
            out.opt_gap = fit.report.optimization_gap;
            auto net = std::make_shared<relunet::MLP>(std::move(fit.net));
            f_hat = [net](std::span<const double> x) { return relunet::forward(*net, x); };
        }
        out.mspe = mspe(f_hat, target, data_cfg.design, n_test, mix_seed(job_seed, 0x7E57, 0));
        out.ok = std::isfinite(out.mspe);
    } catch (const std::exception&) {
        out.ok = false;
    }
    out.wall = now_seconds() - t0;
    return out;
}

void summarize_cells(SweepResult& result, const std::vector<std::pair<long, long>>& cells,
                     int replicates) {
    result.cells = cells;
    result.median_mspe.clear();
    for (std::size_t c = 0; c < cells.size(); ++c) {
        std::vector<double> vals;
        for (int r = 0; r < replicates; ++r) {
            const auto& row = result.rows[c * replicates + r];
            if (!row.flagged) vals.push_back(row.mspe);
        }
        result.median_mspe.push_back(median_of(std::move(vals)));
    }
}

}  // namespace

double mspe(const std::function<double(std::span<const double>)>& f_hat,
            const targets::TargetFunction& target, const datagen::DesignSpec& design, long n_test,
            std::uint64_t seed) {
    if (n_test < 1000) throw std::invalid_argument("mspe: need n_test >= 1000");
    int d = target.spec.dim();
    auto xs = datagen::sample_design(n_test, 1, d, design, mix_seed(seed, 0x3157, 0));
    double s = 0.0;
    for (long t = 0; t < n_test; ++t) {
        std::span<const double> x{xs.data() + t * d, static_cast<std::size_t>(d)};
        double r = f_hat(x) - target.eval(x);
        s += r * r;
    }
    return s / static_cast<double>(n_test);
}

SweepResult rate_sweep(const SweepConfig& config) {
    if (config.grid.empty()) throw std::invalid_argument("rate_sweep: empty grid");
    if (config.replicates < 1) throw std::invalid_argument("rate_sweep: need replicates >= 1");
    SweepResult result;
    result.rate = funclass::rate_model(config.target.spec);
    result.theory_exponent =
        -2.0 * result.rate.exponent_ratio / (2.0 * result.rate.exponent_ratio + 1.0);
    result.config_echo = config.echo;

    const long jobs = static_cast<long>(config.grid.size()) * config.replicates;
    result.rows.assign(jobs, SweepRow{});
    run_jobs(jobs, config.workers, [&](long idx) {
        long cell = idx / config.replicates;
        int rep = static_cast<int>(idx % config.replicates);
        auto [n, m] = config.grid[cell];
        // Common random numbers across cells: the data stream is keyed by the
        // replicate alone, and per-subject keying nests the draws, so a
        // larger (n, m) cell extends the smaller one's data and cell-to-cell
        // comparisons share the subject-process realizations. Optimizer
        // randomness stays cell-specific so training failures don't pair.
        std::uint64_t job_seed = mix_seed(config.seed, 0xCE11, static_cast<std::uint64_t>(rep));
        std::uint64_t opt_seed = mix_seed(config.seed, 0x0F7, static_cast<std::uint64_t>(idx));
        CellFit fit = fit_cell(config.target, result.rate, n, m, config.data, config.est, config.n_test,
                               job_seed, opt_seed);
        SweepRow row;
        row.n = n;
        row.m = m;
        row.replicate = rep;
        row.mspe = fit.mspe;
        row.wall_time_s = fit.wall;
        row.opt_gap = fit.opt_gap;
        row.flagged = !fit.ok;
        result.rows[idx] = row;
    });
    for (const auto& row : result.rows)
        if (row.flagged) ++result.flagged_count;
    summarize_cells(result, config.grid, config.replicates);
    result.sparse_regime = true;
    for (const auto& [n, m] : config.grid)
        result.sparse_regime = result.sparse_regime &&
                               static_cast<double>(m) < funclass::phase_transition_m(n, result.rate.exponent_ratio);

    // slope of log median mspe against log nm
    std::vector<double> lx, ly;
    std::vector<double> seen_nm;
    for (std::size_t c = 0; c < result.cells.size(); ++c) {
        double nm = static_cast<double>(result.cells[c].first) * result.cells[c].second;
        double med = result.median_mspe[c];
        if (!std::isfinite(med) || med <= 1e-14) continue;
        lx.push_back(std::log(nm));
        ly.push_back(std::log(med));
        if (std::find(seen_nm.begin(), seen_nm.end(), nm) == seen_nm.end()) seen_nm.push_back(nm);
    }
    if (seen_nm.size() >= 3) {
        OlsFit fit = ols(lx, ly);
        result.slope = fit.slope;
        result.slope_std_error = fit.slope_se;
        result.slope_fitted = true;
    }
    return result;
}

std::pair<SweepResult, PlateauReport> phase_scan(const PhaseScanConfig& config) {
    if (config.m_grid.size() < 2) throw std::invalid_argument("phase_scan: need at least two m values");
    SweepConfig sweep = config.base;
    sweep.grid.clear();
    for (long m : config.m_grid) sweep.grid.emplace_back(config.n, m);
    SweepResult result = rate_sweep(sweep);

    PlateauReport plateau;
    plateau.threshold = config.threshold;
    plateau.predicted_m_star = funclass::phase_transition_m(config.n, result.rate.exponent_ratio);
    const int reps = sweep.replicates;
    for (std::size_t i = 1; i < config.m_grid.size(); ++i) {
        double dlog_m = std::log(static_cast<double>(config.m_grid[i])) -
                        std::log(static_cast<double>(config.m_grid[i - 1]));
        // replicates are paired across cells (common random numbers), so the
        // per-replicate slope is the low-variance estimate; take its median
        std::vector<double> rep_slopes;
        for (int r = 0; r < reps; ++r) {
            const auto& lo = result.rows[(i - 1) * reps + r];
            const auto& hi = result.rows[i * reps + r];
            if (lo.flagged || hi.flagged || !(lo.mspe > 0.0) || !(hi.mspe > 0.0)) continue;
            rep_slopes.push_back((std::log(hi.mspe) - std::log(lo.mspe)) / dlog_m);
        }
        double slope = std::numeric_limits<double>::quiet_NaN();
        if (!rep_slopes.empty()) {
            slope = median_of(std::move(rep_slopes));
        } else {
            double lo = result.median_mspe[i - 1], hi = result.median_mspe[i];
            if (std::isfinite(lo) && std::isfinite(hi) && lo > 0.0 && hi > 0.0)
                slope = (std::log(hi) - std::log(lo)) / dlog_m;
        }
        plateau.local_slopes.push_back(slope);
        if (!plateau.plateau_found && std::isfinite(slope) && slope > config.threshold) {
            plateau.plateau_found = true;
            plateau.plateau_lo = static_cast<double>(config.m_grid[i - 1]);
            plateau.plateau_hi = static_cast<double>(config.m_grid[i]);
        }
    }
    double last = result.median_mspe.back();
    plateau.floor_ratio = std::isfinite(last) ? last * static_cast<double>(config.n) : 0.0;
    return {std::move(result), std::move(plateau)};
}

ApproxBenchResult approx_bench(const ApproxBenchConfig& config) {
    if (config.sizes.empty()) throw std::invalid_argument("approx_bench: no sizes");
    if (config.dense_count < 3) throw std::invalid_argument("approx_bench: need a dense sample");
    ApproxBenchResult result;
    result.config_echo = config.echo;
    auto rate = funclass::rate_model(config.target.spec);
    result.gamma = rate.exponent_ratio;
    result.rows.assign(config.sizes.size(), ApproxBenchRow{});

    const int d = config.target.spec.dim();
    datagen::DesignSpec design;  // uniform cube
    datagen::ProcessSpec zero_proc;
    datagen::NoiseSpec zero_noise;
    datagen::Dataset dense = datagen::generate_dataset(config.target, 1, config.dense_count, design,
                                                       zero_proc, zero_noise, mix_seed(config.seed, 0xDE5E, 0));

    // sizes run in increasing order so each can warm-start from the previous
    // best: the classes nest, and the chained run keeps the envelope monotone
    std::vector<std::size_t> order(config.sizes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return static_cast<long>(config.sizes[a].first) * config.sizes[a].second <
               static_cast<long>(config.sizes[b].first) * config.sizes[b].second;
    });
    relunet::MLP prev_best;
    bool have_prev = false;

    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        std::size_t idx = order[pos];
        auto [depth, width] = config.sizes[idx];
        ApproxBenchRow row;
        row.depth = depth;
        row.width = width;
        row.lw = static_cast<long>(depth) * width;
        row.reference = std::pow(static_cast<double>(row.lw), -2.0 * result.gamma);
        try {
            estimator::Arch arch{depth, width,
                                 config.beta > 0.0 ? config.beta : config.target.spec.sup_bound};
            estimator::OptConfig opt = config.opt;
            opt.seed = mix_seed(config.seed, 0xBE, static_cast<std::uint64_t>(idx));
            auto fit = estimator::fit_erm(arch, dense, opt);
            if (have_prev) {
                estimator::OptConfig warm_opt = opt;
                warm_opt.seed = mix_seed(config.seed, 0x3A, static_cast<std::uint64_t>(idx));
                auto warm = estimator::fit_erm_from(relunet::embed(prev_best, depth, width), dense,
                                                    warm_opt);
                if (warm.report.final_risk < fit.report.final_risk) fit = std::move(warm);
            }
            row.best_risk = fit.report.final_risk;
            prev_best = fit.net;
            have_prev = true;
            auto net = std::make_shared<relunet::MLP>(std::move(fit.net));
            auto f_hat = [net](std::span<const double> x) { return relunet::forward(*net, x); };
            row.l2_error = mspe(f_hat, config.target, design, config.n_test, mix_seed(config.seed, 0x5E, idx));
            // sup error over a deterministic grid
            if (d == 1) {
                double sup = 0.0;
                for (int g = 0; g <= 512; ++g) {
                    double x = static_cast<double>(g) / 512.0;
                    std::span<const double> xs{&x, 1};
                    sup = std::max(sup, std::abs(f_hat(xs) - config.target.eval(xs)));
                }
                row.sup_error = sup;
            } else {
                double sup = 0.0;
                long per = d == 2 ? 64 : 16;
                std::vector<double> x(d, 0.0);
                std::vector<long> odo(d, 0);
                for (;;) {
                    for (int j = 0; j < d; ++j) x[j] = static_cast<double>(odo[j]) / static_cast<double>(per);
                    sup = std::max(sup, std::abs(f_hat(x) - config.target.eval(x)));
                    int j = d - 1;
                    while (j >= 0 && ++odo[j] > per) odo[j--] = 0;
                    if (j < 0) break;
                }
                row.sup_error = sup;
            }
        } catch (const std::exception&) {
            row.flagged = true;
        }
        result.rows[idx] = row;
    }

    std::vector<double> lx, ly;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        const auto& row = result.rows[order[pos]];
        if (row.flagged || row.best_risk <= 1e-14) continue;
        lx.push_back(std::log(static_cast<double>(row.lw)));
        ly.push_back(std::log(row.best_risk));
    }
    if (lx.size() >= 2) {
        if (lx.size() >= 3) result.slope = ols(lx, ly).slope;
        result.endpoint_slope = (ly.back() - ly.front()) / (lx.back() - lx.front());
        if (lx.size() == 2) result.slope = result.endpoint_slope;
        result.slope_fitted = true;
    }
    return result;
}

std::vector<double> reference_curve(const std::vector<std::pair<long, long>>& cells, double ratio,
                                    double anchor) {
    std::vector<double> out;
    if (cells.empty()) return out;
    double base = funclass::minimax_rate(cells.front().first, cells.front().second, ratio);
    for (const auto& [n, m] : cells) out.push_back(anchor / base * funclass::minimax_rate(n, m, ratio));
    return out;
}

// ---- CSV rendering ---------------------------------------------------------

namespace {

std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// Wall times live in the in-memory rows and the stdout log only: emitted
// tables must be byte-identical across runs, which timings never are.
void sweep_rows_csv(std::ostringstream& os, const SweepResult& result) {
    os << "n,m,replicate,mspe,opt_gap,flagged\n";
    for (const auto& r : result.rows)
        os << r.n << ',' << r.m << ',' << r.replicate << ',' << num(r.mspe) << ',' << num(r.opt_gap)
           << ',' << (r.flagged ? 1 : 0) << '\n';
    for (std::size_t c = 0; c < result.cells.size(); ++c)
        os << "median," << result.cells[c].first << ',' << result.cells[c].second << ','
           << num(result.median_mspe[c]) << ",,\n";
}

}  // namespace

std::string sweep_to_csv(const SweepResult& result) {
    std::ostringstream os;
    sweep_rows_csv(os, result);
    if (result.slope_fitted) {
        os << "slope," << num(result.slope) << ",,,,\n";
        os << "slope_stderr," << num(result.slope_std_error) << ",,,,\n";
    } else {
        os << "slope,not_fitted,,,,\n";
    }
    os << "theory_exponent," << num(result.theory_exponent) << ",,,,\n";
    os << "theory_log_power," << num(result.rate.log_power) << ",,,,\n";
    os << "sparse_regime," << (result.sparse_regime ? 1 : 0) << ",,,,\n";
    os << "flagged_count," << result.flagged_count << ",,,,\n";
    return os.str();
}

std::string phase_to_csv(const SweepResult& result, const PlateauReport& plateau) {
    std::ostringstream os;
    sweep_rows_csv(os, result);
    for (std::size_t i = 0; i + 1 < result.cells.size(); ++i)
        os << "local_slope," << result.cells[i].second << ',' << result.cells[i + 1].second << ','
           << num(plateau.local_slopes[i]) << ",,\n";
    os << "predicted_m_star," << num(plateau.predicted_m_star) << ",,,,\n";
    os << "plateau_threshold," << num(plateau.threshold) << ",,,,\n";
    if (plateau.plateau_found)
        os << "plateau_bracket," << num(plateau.plateau_lo) << ',' << num(plateau.plateau_hi) << ",,,\n";
    else
        os << "plateau_bracket,not_found,,,,\n";
    os << "floor_ratio_n_mspe," << num(plateau.floor_ratio) << ",,,,\n";
    os << "theory_exponent," << num(result.theory_exponent) << ",,,,\n";
    return os.str();
}

std::string bench_to_csv(const ApproxBenchResult& result) {
    std::ostringstream os;
    os << "depth,width,lw,best_risk,sup_error,l2_error,reference,flagged\n";
    for (const auto& r : result.rows)
        os << r.depth << ',' << r.width << ',' << r.lw << ',' << num(r.best_risk) << ','
           << num(r.sup_error) << ',' << num(r.l2_error) << ',' << num(r.reference) << ','
           << (r.flagged ? 1 : 0) << '\n';
    os << "gamma," << num(result.gamma) << ",,,,,,\n";
    if (result.slope_fitted) {
        os << "slope," << num(result.slope) << ",,,,,,\n";
        os << "endpoint_slope," << num(result.endpoint_slope) << ",,,,,,\n";
    } else {
        os << "slope,not_fitted,,,,,,\n";
    }
    return os.str();
}

// ---- config runner ---------------------------------------------------------

namespace {

using serialize::json;
using serialize::require;

EstimatorConfig estimator_from_json(const json& j) {
    EstimatorConfig est;
    std::string kind = require(j, "kind", "estimator").get<std::string>();
    if (kind == "spline")
        est.kind = EstimatorConfig::Kind::Spline;
    else if (kind == "mlp")
        est.kind = EstimatorConfig::Kind::Mlp;
    else
        throw std::runtime_error("config error: unknown estimator kind '" + kind + "'");
    est.order = j.value("order", 3);
    est.k_const = j.value("k_const", 1.0);
    est.k_fixed = j.value("k_fixed", 0);
    est.box_bound = j.value("box_bound", 0.0);
    est.budget_const = j.value("budget_const", 1.0);
    est.beta = j.value("beta", 0.0);
    est.opt.learning_rate = j.value("learning_rate", 1e-3);
    est.opt.epochs = j.value("epochs", 2000);
    est.opt.batch_size = j.value("batch_size", 64);
    est.opt.restarts = j.value("restarts", 3);
    est.opt.patience = j.value("patience", 200);
    std::string method = j.value("optimizer", "adam");
    if (method == "adam")
        est.opt.method = estimator::OptConfig::Method::Adam;
    else if (method == "gd")
        est.opt.method = estimator::OptConfig::Method::Gd;
    else
        throw std::runtime_error("config error: unknown optimizer '" + method + "'");
    return est;
}

DataConfig data_from_json(const json& j) {
    DataConfig cfg;
    if (j.contains("design")) cfg.design = serialize::design_from_json(j.at("design"));
    if (j.contains("process")) cfg.process = serialize::process_from_json(j.at("process"));
    if (j.contains("noise")) cfg.noise = serialize::noise_from_json(j.at("noise"));
    return cfg;
}

std::vector<std::pair<long, long>> grid_from_json(const json& j, const std::string& where) {
    std::vector<std::pair<long, long>> grid;
    if (j.contains("grid")) {
        for (const auto& cell : j.at("grid")) {
            if (!cell.is_array() || cell.size() != 2)
                throw std::runtime_error("config error: grid cells must be [n, m] pairs in " + where);
            grid.emplace_back(cell[0].get<long>(), cell[1].get<long>());
        }
    } else if (j.contains("ns")) {
        long m = require(j, "m", where).get<long>();
        for (const auto& n : j.at("ns")) grid.emplace_back(n.get<long>(), m);
    } else {
        throw std::runtime_error("config error: missing key 'grid' in " + where);
    }
    return grid;
}

std::string out_path(const std::string& dir, const std::string& name, const std::string& ext) {
    return (std::filesystem::path(dir) / (name + ext)).string();
}

void plot_sweep(const std::string& path, const SweepResult& result, const std::string& title,
                bool against_m) {
    svg::Series data;
    data.label = "median mspe";
    svg::Series ref;
    ref.label = "minimax shape";
    ref.dashed = true;
    ref.color = "#d62728";
    double anchor = 0.0;
    for (std::size_t c = 0; c < result.cells.size(); ++c)
        if (std::isfinite(result.median_mspe[c]) && result.median_mspe[c] > 0.0) {
            anchor = result.median_mspe[c];
            break;
        }
    auto refs = reference_curve(result.cells, result.rate.exponent_ratio, anchor);
    for (std::size_t c = 0; c < result.cells.size(); ++c) {
        double xv = against_m ? static_cast<double>(result.cells[c].second)
                              : static_cast<double>(result.cells[c].first) * result.cells[c].second;
        data.x.push_back(xv);
        data.y.push_back(result.median_mspe[c]);
        ref.x.push_back(xv);
        ref.y.push_back(refs[c]);
    }
    svg::write_loglog(path, title, against_m ? "m" : "nm", "mspe", {data, ref});
}

std::vector<std::string> run_block(const std::string& key, const json& block, const std::string& out_dir,
                                   int workers) {
    std::vector<std::string> written;
    if (key == "gamma") {
        auto tree = serialize::tree_from_json(require(block, "tree", "gamma"));
        double gamma = funclass::gamma_direct(tree);
        std::ostringstream os;
        os << "node_path,s,K,effective_smoothness\n";
        std::function<void(const funclass::CompositionTree&, std::vector<int>&)> walk =
            [&](const funclass::CompositionTree& node, std::vector<int>& path) {
                std::ostringstream ps;
                ps << '"';
                for (std::size_t i = 0; i < path.size(); ++i) ps << (i ? "." : "") << path[i];
                if (path.empty()) ps << "root";
                ps << '"';
                os << ps.str() << ',' << num(node.s) << ',' << node.arity << ','
                   << num(funclass::effective_smoothness(tree, path)) << '\n';
                for (int c = 0; c < static_cast<int>(node.children.size()); ++c) {
                    path.push_back(c);
                    walk(node.children[c], path);
                    path.pop_back();
                }
            };
        std::vector<int> path;
        walk(tree, path);
        os << "gamma," << num(gamma) << ",,\n";
        os << "rate_exponent," << num(2.0 * gamma / (2.0 * gamma + 1.0)) << ",,\n";
        std::string name = block.value("name", std::string("gamma"));
        std::string p = out_path(out_dir, name, ".csv");
        serialize::write_file(p, os.str());
        written.push_back(p);
        return written;
    }
    if (key == "generate") {
        auto target = serialize::target_from_json(require(block, "target", "generate"));
        long n = require(block, "n", "generate").get<long>();
        long m = require(block, "m", "generate").get<long>();
        DataConfig data_cfg = data_from_json(block);
        std::uint64_t seed = block.value("seed", 1ULL);
        auto ds = datagen::generate_dataset(target, n, m, data_cfg.design, data_cfg.process,
                                            data_cfg.noise, seed);
        std::string name = block.value("name", std::string("data"));
        std::string csv_path = out_path(out_dir, name, ".csv");
        serialize::write_file(csv_path, serialize::dataset_to_csv(ds));
        json sidecar;
        sidecar["target"] = serialize::target_to_json(target, block.at("target"));
        sidecar["n"] = n;
        sidecar["m"] = m;
        sidecar["d"] = ds.d;
        sidecar["design"] = serialize::design_to_json(data_cfg.design);
        sidecar["process"] = serialize::process_to_json(data_cfg.process);
        sidecar["noise"] = serialize::noise_to_json(data_cfg.noise);
        sidecar["seed"] = seed;
        std::string side_path = out_path(out_dir, name, ".json");
        serialize::write_file(side_path, sidecar.dump(2) + "\n");
        written.push_back(csv_path);
        written.push_back(side_path);
        return written;
    }
    if (key == "fit") {
        std::string data_path = require(block, "data", "fit").get<std::string>();
        auto ds = serialize::dataset_from_csv(serialize::read_file(data_path));
        EstimatorConfig est = estimator_from_json(require(block, "estimator", "fit"));
        std::string name = block.value("name", std::string("fit"));
        estimator::FitReport report;
        std::string model_text;
        if (est.kind == EstimatorConfig::Kind::Spline) {
            int k = block.value("k", 0);
            if (k <= 0) throw std::runtime_error("config error: missing key 'k' in fit (spline)");
            double box = est.box_bound > 0.0 ? est.box_bound : std::log(static_cast<double>(ds.n));
            auto fit = estimator::fit_spline(ds, k, est.order, box);
            report = fit.report;
            std::ostringstream ms;
            ms << "spline 1\n" << fit.model.d << ' ' << fit.model.resolution << ' ' << fit.model.order
               << ' ' << num(fit.model.box_bound) << '\n';
            char buf[64];
            for (std::size_t i = 0; i < fit.model.coeff.size(); ++i) {
                std::snprintf(buf, sizeof buf, "%.17g", fit.model.coeff[i]);
                ms << buf << (i + 1 == fit.model.coeff.size() ? "" : " ");
            }
            ms << '\n';
            model_text = ms.str();
        } else {
            int depth = require(block, "depth", "fit").get<int>();
            int width = require(block, "width", "fit").get<int>();
            estimator::Arch arch{depth, width, est.beta > 0.0 ? est.beta : 1.0};
            estimator::OptConfig opt = est.opt;
            opt.seed = block.value("seed", 1ULL);
            auto fit = estimator::fit_erm(arch, ds, opt);
            report = fit.report;
            model_text = relunet::to_text(fit.net);
        }
        std::string model_path = out_path(out_dir, name + "_model", ".txt");
        serialize::write_file(model_path, model_text);
        std::string report_path = out_path(out_dir, name + "_report", ".csv");
        serialize::write_file(report_path, serialize::report_to_csv(report));
        written.push_back(model_path);
        written.push_back(report_path);
        return written;
    }
    if (key == "rate_sweep" || key == "phase_scan") {
        SweepConfig cfg;
        cfg.target = serialize::target_from_json(require(block, "target", key));
        cfg.replicates = block.value("replicates", 8);
        cfg.data = data_from_json(block);
        cfg.est = estimator_from_json(require(block, "estimator", key));
        cfg.n_test = block.value("n_test", 4096L);
        cfg.seed = block.value("seed", 1ULL);
        cfg.workers = workers;
        cfg.echo = block.dump();
        std::string name = block.value("name", key);
        if (key == "rate_sweep") {
            cfg.grid = grid_from_json(block, key);
            SweepResult result = rate_sweep(cfg);
            std::string csv_path = out_path(out_dir, name, ".csv");
            serialize::write_file(csv_path, sweep_to_csv(result));
            std::string svg_path = out_path(out_dir, name, ".svg");
            plot_sweep(svg_path, result, "rate sweep", false);
            written.push_back(csv_path);
            written.push_back(svg_path);
        } else {
            PhaseScanConfig scan;
            scan.base = cfg;
            scan.n = require(block, "n", key).get<long>();
            for (const auto& m : require(block, "ms", key)) scan.m_grid.push_back(m.get<long>());
            scan.threshold = block.value("threshold", -0.25);
            auto [result, plateau] = phase_scan(scan);
            std::string csv_path = out_path(out_dir, name, ".csv");
            serialize::write_file(csv_path, phase_to_csv(result, plateau));
            std::string svg_path = out_path(out_dir, name, ".svg");
            plot_sweep(svg_path, result, "phase scan (n fixed)", true);
            written.push_back(csv_path);
            written.push_back(svg_path);
        }
        return written;
    }
    if (key == "approx_bench") {
        ApproxBenchConfig cfg;
        cfg.target = serialize::target_from_json(require(block, "target", "approx_bench"));
        cfg.dense_count = block.value("dense_count", 4000L);
        cfg.n_test = block.value("n_test", 4096L);
        cfg.seed = block.value("seed", 1ULL);
        cfg.workers = workers;
        cfg.echo = block.dump();
        cfg.beta = block.value("beta", 0.0);
        EstimatorConfig est = estimator_from_json(require(block, "estimator", "approx_bench"));
        cfg.opt = est.opt;
        if (block.contains("budgets")) {
            for (const auto& b : block.at("budgets"))
                cfg.sizes.push_back(relunet::expand_budget(b.get<long>()));
        } else {
            for (const auto& sz : require(block, "sizes", "approx_bench"))
                cfg.sizes.emplace_back(sz[0].get<int>(), sz[1].get<int>());
        }
        ApproxBenchResult result = approx_bench(cfg);
        std::string name = block.value("name", std::string("bench"));
        std::string csv_path = out_path(out_dir, name, ".csv");
        serialize::write_file(csv_path, bench_to_csv(result));
        svg::Series data, ref;
        data.label = "best risk";
        ref.label = "(LW)^-2g shape";
        ref.dashed = true;
        ref.color = "#d62728";
        double anchor = 0.0;
        for (const auto& row : result.rows)
            if (!row.flagged && row.best_risk > 0.0) {
                anchor = row.best_risk / row.reference;
                break;
            }
        for (const auto& row : result.rows) {
            data.x.push_back(static_cast<double>(row.lw));
            data.y.push_back(row.best_risk);
            ref.x.push_back(static_cast<double>(row.lw));
            ref.y.push_back(anchor * row.reference);
        }
        std::string svg_path = out_path(out_dir, name, ".svg");
        svg::write_loglog(svg_path, "approximation benchmark", "LW", "training risk", {data, ref});
        written.push_back(csv_path);
        written.push_back(svg_path);
        return written;
    }
    throw std::runtime_error("config error: unknown block '" + key + "'");
}

}  // namespace

std::vector<std::string> run_config(const std::string& config_path, const std::string& out_dir,
                                    int workers) {
    json config = json::parse(serialize::read_file(config_path));
    if (!config.is_object()) throw std::runtime_error("config error: top level must be an object");
    std::filesystem::create_directories(out_dir);
    // canonical block order keeps outputs independent of key order in the file
    const char* order[] = {"gamma", "generate", "fit", "rate_sweep", "phase_scan", "approx_bench"};
    std::vector<std::string> written;
    std::size_t handled = 0;
    for (const char* key : order) {
        if (!config.contains(key)) continue;
        ++handled;
        auto files = run_block(key, config.at(key), out_dir, workers);
        written.insert(written.end(), files.begin(), files.end());
    }
    if (handled != config.size()) {
        for (const auto& [key, value] : config.items()) {
            bool known = false;
            for (const char* k : order) known = known || key == k;
            if (!known) throw std::runtime_error("config error: unknown block '" + key + "'");
        }
    }
    return written;
}

}  // namespace clusterfit::harness
