#include "clusterfit/estimator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "clusterfit/rng.hpp"

namespace clusterfit::estimator {

namespace {

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

}  // namespace

// ---- B-splines -------------------------------------------------------------

double bspline_1d(int r, double x) {
    if (r < 1) throw std::invalid_argument("bspline_1d: order must be >= 1");
    if (r == 1) return (x >= 0.0 && x < 1.0) ? 1.0 : 0.0;
    if (x <= 0.0 || x >= static_cast<double>(r)) return 0.0;
    double sum = 0.0;
    double binom = 1.0;  // C(r, i)
    double sign = 1.0;
    for (int i = 0; i <= r; ++i) {
        double t = x - static_cast<double>(i);
        if (t > 0.0) sum += sign * binom * std::pow(t, r - 1);
        sign = -sign;
        binom = binom * static_cast<double>(r - i) / static_cast<double>(i + 1);
    }
    return sum / factorial(r - 1);
}

double tensor_bspline(int k, std::span<const int> l, std::span<const double> x, int r) {
    if (k < 1) throw std::invalid_argument("tensor_bspline: resolution must be >= 1");
    if (l.size() != x.size()) throw std::invalid_argument("tensor_bspline: index/point dimension mismatch");
    double v = 1.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (l[j] < -r + 1 || l[j] > k) throw std::invalid_argument("tensor_bspline: index outside box");
        v *= bspline_1d(r, static_cast<double>(k) * x[j] - static_cast<double>(l[j]));
        if (v == 0.0) return 0.0;
    }
    return v;
}

long SplineModel::coeff_count() const {
    long c = 1;
    for (int j = 0; j < d; ++j) c *= resolution + order;
    return c;
}

void SplineModel::validate() const {
    if (order < 1 || resolution < 1 || d < 1)
        throw std::invalid_argument("spline model: need order, resolution, d >= 1");
    if (order > 8 || d > 8) throw std::invalid_argument("spline model: order and dimension capped at 8");
    if (box_bound < 0.0) throw std::invalid_argument("spline model: box bound must be >= 0");
    if (static_cast<long>(coeff.size()) != coeff_count())
        throw std::invalid_argument("spline model: coefficient count mismatch");
    for (double a : coeff)
        if (std::abs(a) > box_bound + 1e-12)
            throw std::invalid_argument("spline model: coefficient outside the box");
}

namespace {

// Nonzero tensor basis entries at one point: per-dimension active 1-d
// values, combined by an odometer over the r^d product.
struct ActiveBasis {
    std::vector<long> index;
    std::vector<double> value;
};

void active_at(const double* x, int d, int k, int r, ActiveBasis& out) {
    out.index.clear();
    out.value.clear();
    int per = k + r;
    // per-dim candidates; at most r+2 integer shifts can be active
    double vals[8][12];
    int offs[8][12];
    int counts[8];
    for (int j = 0; j < d; ++j) {
        double kx = static_cast<double>(k) * x[j];
        int lo = static_cast<int>(std::floor(kx)) - r;
        counts[j] = 0;
        for (int l = std::max(lo, -r + 1); l <= std::min(static_cast<int>(std::floor(kx)) + 1, k); ++l) {
            double b = bspline_1d(r, kx - static_cast<double>(l));
            if (b != 0.0) {
                vals[j][counts[j]] = b;
                offs[j][counts[j]] = l + r - 1;
                ++counts[j];
            }
        }
        if (counts[j] == 0) return;  // point outside every basis support
    }
    int odo[8] = {0};
    for (;;) {
        double v = 1.0;
        long idx = 0;
        for (int j = 0; j < d; ++j) {
            v *= vals[j][odo[j]];
            idx = idx * per + offs[j][odo[j]];
        }
        out.index.push_back(idx);
        out.value.push_back(v);
        int j = d - 1;
        while (j >= 0 && ++odo[j] == counts[j]) odo[j--] = 0;
        if (j < 0) break;
    }
}

}  // namespace

double SplineModel::operator()(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != d) throw std::invalid_argument("spline model: dimension mismatch");
    if (order > 8 || d > 8) throw std::invalid_argument("spline model: order and dimension capped at 8");
    ActiveBasis active;
    active_at(x.data(), d, resolution, order, active);
    double v = 0.0;
    for (std::size_t t = 0; t < active.index.size(); ++t) v += coeff[active.index[t]] * active.value[t];
    return v;
}

// ---- empirical risk --------------------------------------------------------

double empirical_risk(const std::function<double(std::span<const double>)>& f,
                      const datagen::Dataset& data) {
    if (data.count() < 1) throw std::invalid_argument("empirical_risk: empty dataset");
    double s = 0.0;
    for (long i = 0; i < data.n; ++i)
        for (long j = 0; j < data.m; ++j) {
            double r = data.response(i, j) - f(data.point(i, j));
            s += r * r;
        }
    return s / static_cast<double>(data.count());
}

double empirical_risk(const relunet::MLP& net, const datagen::Dataset& data) {
    if (data.count() < 1) throw std::invalid_argument("empirical_risk: empty dataset");
    relunet::Workspace ws;
    ws.resize(net);
    double pre = 0.0, s = 0.0;
    for (long t = 0; t < data.count(); ++t) {
        double r = data.y[t] - relunet::forward_ws(net, data.x.data() + t * data.d, ws, pre);
        s += r * r;
    }
    return s / static_cast<double>(data.count());
}

double empirical_risk(const SplineModel& model, const datagen::Dataset& data) {
    if (data.count() < 1) throw std::invalid_argument("empirical_risk: empty dataset");
    double s = 0.0;
    for (long t = 0; t < data.count(); ++t) {
        std::span<const double> x{data.x.data() + t * data.d, static_cast<std::size_t>(data.d)};
        double r = data.y[t] - model(x);
        s += r * r;
    }
    return s / static_cast<double>(data.count());
}

// ---- spline fitting --------------------------------------------------------

SplineFit fit_spline(const datagen::Dataset& data, int k, int r, double box_bound) {
    double t0 = now_seconds();
    if (k < 1 || r < 1) throw std::invalid_argument("fit_spline: need k, r >= 1");
    if (r > 8 || data.d > 8) throw std::invalid_argument("fit_spline: order and dimension capped at 8");
    if (box_bound < 0.0) throw std::invalid_argument("fit_spline: box bound must be >= 0");
    if (data.count() < 3) throw std::invalid_argument("fit_spline: need nm >= 3");

    SplineModel model;
    model.order = r;
    model.resolution = k;
    model.d = data.d;
    model.box_bound = box_bound;
    long p = model.coeff_count();
    model.coeff.assign(p, 0.0);

    const long nm = data.count();
    // Gram and right-hand side assembled once; PGD then costs O(p^2) per step.
    std::vector<double> gram(static_cast<std::size_t>(p) * p, 0.0);
    std::vector<double> rhs(p, 0.0);
    double y2 = 0.0;
    ActiveBasis active;
    for (long t = 0; t < nm; ++t) {
        active_at(data.x.data() + t * data.d, data.d, k, r, active);
        double yt = data.y[t];
        y2 += yt * yt;
        const std::size_t na = active.index.size();
        for (std::size_t a = 0; a < na; ++a) {
            long ia = active.index[a];
            double va = active.value[a];
            rhs[ia] += va * yt;
            double* row = gram.data() + static_cast<std::size_t>(ia) * p;
            for (std::size_t b = 0; b < na; ++b) row[active.index[b]] += va * active.value[b];
        }
    }

    std::vector<double> ga(p, 0.0);
    auto apply_gram = [&](const std::vector<double>& a) {
        for (long i = 0; i < p; ++i) {
            const double* row = gram.data() + static_cast<std::size_t>(i) * p;
            double s = 0.0;
            for (long j = 0; j < p; ++j) s += row[j] * a[j];
            ga[i] = s;
        }
    };
    auto objective_from_ga = [&](const std::vector<double>& a) {
        double quad = 0.0, lin = 0.0;
        for (long i = 0; i < p; ++i) {
            quad += a[i] * ga[i];
            lin += a[i] * rhs[i];
        }
        return (y2 - 2.0 * lin + quad) / static_cast<double>(nm);
    };

    // largest eigenvalue of the Gram by power iteration; the PGD step is the
    // reciprocal of the objective's curvature bound 2*lambda_max/nm
    std::vector<double> v(p, 1.0 / std::sqrt(static_cast<double>(p)));
    double lambda_max = 0.0;
    for (int it = 0; it < 100; ++it) {
        apply_gram(v);
        double norm = std::sqrt(std::inner_product(ga.begin(), ga.end(), ga.begin(), 0.0));
        if (norm == 0.0) break;
        lambda_max = norm;
        for (long i = 0; i < p; ++i) v[i] = ga[i] / norm;
    }
    lambda_max *= 1.0 + 1e-6;  // power iteration approaches from below

    FitReport report;
    report.restarts = 1;
    std::ostringstream echo;
    echo << "spline k=" << k << " r=" << r << " box=" << box_bound << " p=" << p << " nm=" << nm;
    report.config_echo = echo.str();

    apply_gram(model.coeff);
    double obj = objective_from_ga(model.coeff);
    report.loss_trace.push_back(obj);
    if (lambda_max > 0.0 && box_bound > 0.0) {
        const double step = static_cast<double>(nm) / (2.0 * lambda_max);
        const int max_iter = 100000;
        for (int it = 0; it < max_iter; ++it) {
            for (long i = 0; i < p; ++i) {
                double g = 2.0 * (ga[i] - rhs[i]) / static_cast<double>(nm);
                model.coeff[i] = std::clamp(model.coeff[i] - step * g, -box_bound, box_bound);
            }
            apply_gram(model.coeff);
            double next = objective_from_ga(model.coeff);
            if (next > obj + 1e-10 * std::max(1.0, std::abs(obj)))
                throw std::logic_error("fit_spline: objective increased on a projected-gradient step");
            double decrease = obj - next;
            obj = next;
            report.loss_trace.push_back(obj);
            // run to numerical stall: a looser cutoff leaves the coefficients
            // meaningfully short of the constrained optimum
            if (decrease <= 1e-15 * std::max(std::abs(obj), 1e-300)) break;
        }
    }
    if (report.loss_trace.size() > 2000) {
        std::vector<double> thin;
        std::size_t stride = report.loss_trace.size() / 1000;
        for (std::size_t i = 0; i < report.loss_trace.size(); i += stride) thin.push_back(report.loss_trace[i]);
        thin.push_back(report.loss_trace.back());
        report.loss_trace = std::move(thin);
    }
    report.final_risk = obj;
    report.best_restart_risk = obj;
    report.optimization_gap = 0.0;
    report.wall_time_s = now_seconds() - t0;
    return {std::move(model), std::move(report)};
}

int choose_k(long n, long m, double s, int d, double c) {
    if (n < 1 || m < 1 || n * m < 3) throw std::invalid_argument("choose_k: need nm >= 3");
    if (!(s > 0.0) || d < 1 || !(c > 0.0)) throw std::invalid_argument("choose_k: bad parameters");
    double nm = static_cast<double>(n) * static_cast<double>(m);
    double e = 1.0 / (2.0 * s + static_cast<double>(d));
    double v = c * std::pow(nm, e) * std::pow(std::log(nm), -3.0 * e);
    return std::max(1, static_cast<int>(std::floor(v)));
}

// ---- ERM over ReLU nets ----------------------------------------------------

namespace {

struct FlatParams {
    std::vector<double> data;
};

void flatten(const relunet::MLP& net, FlatParams& out) {
    out.data.clear();
    for (const auto& w : net.weight) out.data.insert(out.data.end(), w.begin(), w.end());
    for (const auto& b : net.bias) out.data.insert(out.data.end(), b.begin(), b.end());
}

void unflatten(const FlatParams& in, relunet::MLP& net) {
    std::size_t o = 0;
    for (auto& w : net.weight) {
        std::copy(in.data.begin() + o, in.data.begin() + o + w.size(), w.begin());
        o += w.size();
    }
    for (auto& b : net.bias) {
        std::copy(in.data.begin() + o, in.data.begin() + o + b.size(), b.begin());
        o += b.size();
    }
}

struct RestartOutcome {
    bool diverged = false;
    double best_risk = std::numeric_limits<double>::infinity();
    FlatParams best_params;
    std::vector<double> trace;
};

RestartOutcome train_once(relunet::MLP net, const datagen::Dataset& data, const OptConfig& opt,
                          std::uint64_t restart_seed) {
    RestartOutcome out;
    relunet::Workspace ws;
    ws.resize(net);
    relunet::Gradients grad;
    grad.weight.resize(net.depth() + 1);
    grad.bias.resize(net.depth() + 1);
    for (int l = 0; l <= net.depth(); ++l) {
        grad.weight[l].assign(net.weight[l].size(), 0.0);
        grad.bias[l].assign(net.bias[l].size(), 0.0);
    }

    const long nm = data.count();
    const int batch = std::max(1, std::min<int>(opt.batch_size, static_cast<int>(nm)));
    std::vector<long> order(nm);
    std::iota(order.begin(), order.end(), 0);

    // Adam state over flattened views
    std::vector<std::vector<double>> mw(net.depth() + 1), vw(net.depth() + 1), mb(net.depth() + 1),
        vb(net.depth() + 1);
    for (int l = 0; l <= net.depth(); ++l) {
        mw[l].assign(net.weight[l].size(), 0.0);
        vw[l].assign(net.weight[l].size(), 0.0);
        mb[l].assign(net.bias[l].size(), 0.0);
        vb[l].assign(net.bias[l].size(), 0.0);
    }
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    long step = 0;

    // checkpoint the starting point: more epochs can then never report a
    // worse risk than fewer
    {
        double risk0 = empirical_risk(net, data);
        out.trace.push_back(risk0);
        if (std::isfinite(risk0)) {
            out.best_risk = risk0;
            flatten(net, out.best_params);
        } else {
            out.diverged = true;
            return out;
        }
    }

    int since_best = 0;
    for (int epoch = 0; epoch < opt.epochs; ++epoch) {
        Rng shuffle_rng(mix_seed(restart_seed, 0x5F0F, static_cast<std::uint64_t>(epoch)));
        for (long i = nm - 1; i > 0; --i)
            std::swap(order[i], order[shuffle_rng.uniform_int(static_cast<int>(i + 1))]);
        for (long start = 0; start < nm; start += batch) {
            long stop = std::min(nm, start + batch);
            for (int l = 0; l <= net.depth(); ++l) {
                std::fill(grad.weight[l].begin(), grad.weight[l].end(), 0.0);
                std::fill(grad.bias[l].begin(), grad.bias[l].end(), 0.0);
            }
            for (long t = start; t < stop; ++t)
                relunet::accumulate_gradient(net, data.x.data() + order[t] * data.d, data.y[order[t]], ws,
                                             grad);
            double inv = 1.0 / static_cast<double>(stop - start);
            ++step;
            if (opt.method == OptConfig::Method::Adam) {
                double corr1 = 1.0 - std::pow(b1, static_cast<double>(step));
                double corr2 = 1.0 - std::pow(b2, static_cast<double>(step));
                for (int l = 0; l <= net.depth(); ++l) {
                    for (std::size_t i = 0; i < net.weight[l].size(); ++i) {
                        double g = grad.weight[l][i] * inv;
                        mw[l][i] = b1 * mw[l][i] + (1.0 - b1) * g;
                        vw[l][i] = b2 * vw[l][i] + (1.0 - b2) * g * g;
                        net.weight[l][i] -=
                            opt.learning_rate * (mw[l][i] / corr1) / (std::sqrt(vw[l][i] / corr2) + eps);
                    }
                    for (std::size_t i = 0; i < net.bias[l].size(); ++i) {
                        double g = grad.bias[l][i] * inv;
                        mb[l][i] = b1 * mb[l][i] + (1.0 - b1) * g;
                        vb[l][i] = b2 * vb[l][i] + (1.0 - b2) * g * g;
                        net.bias[l][i] -=
                            opt.learning_rate * (mb[l][i] / corr1) / (std::sqrt(vb[l][i] / corr2) + eps);
                    }
                }
            } else {
                for (int l = 0; l <= net.depth(); ++l) {
                    for (std::size_t i = 0; i < net.weight[l].size(); ++i)
                        net.weight[l][i] -= opt.learning_rate * grad.weight[l][i] * inv;
                    for (std::size_t i = 0; i < net.bias[l].size(); ++i)
                        net.bias[l][i] -= opt.learning_rate * grad.bias[l][i] * inv;
                }
            }
        }
        double risk = empirical_risk(net, data);
        out.trace.push_back(risk);
        if (!std::isfinite(risk)) {
            out.diverged = true;
            break;
        }
        if (risk < out.best_risk) {
            out.best_risk = risk;
            flatten(net, out.best_params);
            since_best = 0;
        } else if (opt.patience > 0 && ++since_best >= opt.patience) {
            break;
        }
    }
    if (out.trace.empty()) out.diverged = true;
    return out;
}

}  // namespace

ErmFit fit_erm(const Arch& arch, const datagen::Dataset& data, const OptConfig& opt) {
    double t0 = now_seconds();
    if (data.count() < 3) throw std::invalid_argument("fit_erm: need nm >= 3");
    if (opt.restarts < 1) throw std::invalid_argument("fit_erm: need restarts >= 1");

    FitReport report;
    report.restarts = opt.restarts;
    std::ostringstream echo;
    echo << "mlp L=" << arch.depth << " W=" << arch.width << " beta=" << arch.beta
         << (opt.method == OptConfig::Method::Adam ? " adam" : " gd") << " lr=" << opt.learning_rate
         << " epochs=" << opt.epochs << " batch=" << opt.batch_size << " restarts=" << opt.restarts
         << " nm=" << data.count();
    report.config_echo = echo.str();

    int chosen = -1;
    double chosen_risk = std::numeric_limits<double>::infinity();
    double best_any = std::numeric_limits<double>::infinity();
    FlatParams chosen_params;
    std::vector<double> chosen_trace;
    for (int r = 0; r < opt.restarts; ++r) {
        std::uint64_t restart_seed = opt.seed + static_cast<std::uint64_t>(r);
        RestartOutcome res = train_once(
            relunet::init_mlp(data.d, arch.depth, arch.width, arch.beta, restart_seed), data, opt,
            restart_seed);
        if (std::isfinite(res.best_risk)) best_any = std::min(best_any, res.best_risk);
        if (res.diverged) {
            ++report.discarded_restarts;
            continue;
        }
        if (res.best_risk < chosen_risk) {
            chosen = r;
            chosen_risk = res.best_risk;
            chosen_params = std::move(res.best_params);
            chosen_trace = std::move(res.trace);
        }
    }
    if (chosen < 0) throw std::runtime_error("fit_erm: every restart diverged");

    ErmFit fit;
    fit.net = relunet::init_mlp(data.d, arch.depth, arch.width, arch.beta, opt.seed);
    unflatten(chosen_params, fit.net);
    report.final_risk = chosen_risk;
    report.best_restart_risk = best_any;
    report.optimization_gap = std::max(0.0, chosen_risk - best_any);
    report.loss_trace = std::move(chosen_trace);
    report.wall_time_s = now_seconds() - t0;
    fit.report = std::move(report);
    return fit;
}

ErmFit fit_erm_from(const relunet::MLP& start, const datagen::Dataset& data, const OptConfig& opt) {
    double t0 = now_seconds();
    if (data.count() < 3) throw std::invalid_argument("fit_erm_from: need nm >= 3");
    start.validate();
    if (start.input_dim != data.d) throw std::invalid_argument("fit_erm_from: dimension mismatch");
    RestartOutcome res = train_once(start, data, opt, opt.seed);
    if (res.diverged && !std::isfinite(res.best_risk))
        throw std::runtime_error("fit_erm_from: training diverged immediately");
    ErmFit fit;
    fit.net = start;
    unflatten(res.best_params, fit.net);
    FitReport report;
    report.restarts = 1;
    report.discarded_restarts = res.diverged ? 1 : 0;
    report.final_risk = res.best_risk;
    report.best_restart_risk = res.best_risk;
    report.optimization_gap = 0.0;
    report.loss_trace = std::move(res.trace);
    report.wall_time_s = now_seconds() - t0;
    std::ostringstream echo;
    echo << "mlp warm-start L=" << start.depth() << " W=" << (start.widths.empty() ? 0 : start.widths[0])
         << " nm=" << data.count();
    report.config_echo = echo.str();
    fit.report = std::move(report);
    return fit;
}

}  // namespace clusterfit::estimator
