#include "clusterfit/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "clusterfit/rng.hpp"

namespace clusterfit::complexity {

RademacherEstimate rademacher_average(const Dictionary& dict, std::span<const double> xs, long nm, int d,
                                      long draws, std::uint64_t seed) {
    if (dict.members.empty()) throw std::invalid_argument("rademacher_average: dictionary is empty");
    if (draws < 1) throw std::invalid_argument("rademacher_average: need draws >= 1");
    if (nm < 1 || xs.size() != static_cast<std::size_t>(nm) * d)
        throw std::invalid_argument("rademacher_average: sample shape mismatch");

    // deviations f - ref cached once per member
    const std::size_t members = dict.members.size();
    std::vector<double> dev(members * static_cast<std::size_t>(nm));
    for (std::size_t f = 0; f < members; ++f) {
        for (long t = 0; t < nm; ++t) {
            std::span<const double> x{xs.data() + t * d, static_cast<std::size_t>(d)};
            dev[f * nm + t] = dict.members[f](x) - dict.reference(x);
        }
    }

    std::vector<double> sigma(nm);
    double mean = 0.0, m2 = 0.0;
    Rng rng(mix_seed(seed, 0x5ADE, 0));
    for (long dr = 0; dr < draws; ++dr) {
        for (long t = 0; t < nm; ++t) sigma[t] = rng.sign();
        double sup = 0.0;
        for (std::size_t f = 0; f < members; ++f) {
            const double* row = dev.data() + f * nm;
            double s = 0.0;
            for (long t = 0; t < nm; ++t) s += sigma[t] * row[t];
            sup = std::max(sup, std::abs(s));
        }
        sup /= static_cast<double>(nm);
        double delta = sup - mean;
        mean += delta / static_cast<double>(dr + 1);
        m2 += delta * (sup - mean);
    }
    RademacherEstimate out;
    out.estimate = mean;
    out.std_error = draws > 1 ? std::sqrt(m2 / static_cast<double>(draws - 1) / static_cast<double>(draws))
                              : 0.0;
    return out;
}

Dictionary localize(const Dictionary& dict, double radius, std::span<const double> px, int d) {
    if (d < 1 || px.size() % d != 0) throw std::invalid_argument("localize: bad sample shape");
    long count = static_cast<long>(px.size()) / d;
    if (count < 10000) throw std::invalid_argument("localize: need at least 10^4 distance sample points");
    if (radius < 0.0) throw std::invalid_argument("localize: radius must be >= 0");
    Dictionary out;
    out.reference = dict.reference;
    out.label = dict.label;
    for (const auto& f : dict.members) {
        double dist = 0.0;
        for (long t = 0; t < count; ++t) {
            std::span<const double> x{px.data() + t * d, static_cast<std::size_t>(d)};
            double r = f(x) - dict.reference(x);
            dist += r * r;
        }
        dist /= static_cast<double>(count);
        if (dist <= radius) out.members.push_back(f);
    }
    return out;
}

double fixed_point(const std::vector<double>& r_grid, const std::vector<double>& phi) {
    if (r_grid.empty() || r_grid.size() != phi.size())
        throw std::invalid_argument("fixed_point: grid and estimates must match and be nonempty");
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
        if (!(r_grid[i] > 0.0)) throw std::invalid_argument("fixed_point: grid must be positive");
        if (i > 0 && r_grid[i] <= r_grid[i - 1])
            throw std::invalid_argument("fixed_point: grid must be increasing");
        if (phi[i] < 0.0) throw std::invalid_argument("fixed_point: estimates must be nonnegative");
    }
    if (phi[0] <= r_grid[0]) return r_grid[0];
    std::size_t cross = 0;
    for (std::size_t i = 1; i < r_grid.size(); ++i) {
        if (phi[i] <= r_grid[i]) {
            cross = i;
            break;
        }
    }
    if (cross == 0) throw std::runtime_error("fixed_point: no crossing found, grid too narrow");
    // phi interpolated linearly in log r between the bracketing grid points
    double la = std::log(r_grid[cross - 1]), lb = std::log(r_grid[cross]);
    double pa = phi[cross - 1], pb = phi[cross];
    auto interp = [&](double r) {
        double w = (std::log(r) - la) / (lb - la);
        return pa + (pb - pa) * w;
    };
    double lo = r_grid[cross - 1], hi = r_grid[cross];
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (interp(mid) > mid)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

namespace {

double iota_factor(long n, long m, double b1, double b2, double b3) {
    double ln_n = std::log(static_cast<double>(n));
    double ln_nm = std::log(static_cast<double>(n) * static_cast<double>(m));
    return b1 * b1 + b2 * b2 * ln_n * ln_n + b3 * b3 * ln_nm * ln_nm;
}

}  // namespace

double vc_size_bound(double depth, double width, long n, long m, double b1, double b2, double b3) {
    if (n < 1 || m < 1) throw std::invalid_argument("vc_size_bound: need n, m >= 1");
    double lw = depth * width;
    if (!(std::log(lw) >= 1.0)) throw std::invalid_argument("vc_size_bound: requires log(LW) >= 1");
    double nm = static_cast<double>(n) * static_cast<double>(m);
    return (b1 * b1 + b2 * b2) / static_cast<double>(n) +
           depth * depth * width * width * std::log(lw) * iota_factor(n, m, b1, b2, b3) * std::log(nm) / nm;
}

double oracle_bound(double approx_err, long n, long m, double r_star, double b1, double b2, double b3) {
    if (n < 1 || m < 1) throw std::invalid_argument("oracle_bound: need n, m >= 1");
    if (approx_err < 0.0 || r_star < 0.0 || b1 < 0.0 || b2 < 0.0 || b3 < 0.0)
        throw std::invalid_argument("oracle_bound: inputs must be nonnegative");
    double nm = static_cast<double>(n) * static_cast<double>(m);
    return approx_err + (b1 * b1 + b2 * b2) / static_cast<double>(n) +
           (r_star + 1.0 / nm) * iota_factor(n, m, b1, b2, b3);
}

ComplexityReport complexity_profile(const Dictionary& dict, std::span<const double> xs, long nm, int d,
                                    std::span<const double> px, double b1, long draws, std::uint64_t seed,
                                    const std::vector<double>& grid) {
    ComplexityReport report;
    report.label = dict.label;
    report.draws = draws;
    if (grid.empty()) {
        const int points = 25;
        double lo = std::log(1e-6), hi = std::log(4.0 * b1 * b1);
        for (int i = 0; i < points; ++i)
            report.r_grid.push_back(std::exp(lo + (hi - lo) * static_cast<double>(i) / (points - 1)));
    } else {
        report.r_grid = grid;
    }
    for (std::size_t i = 0; i < report.r_grid.size(); ++i) {
        Dictionary local = localize(dict, report.r_grid[i], px, d);
        if (local.members.empty()) {
            report.phi.push_back(0.0);
            report.std_error.push_back(0.0);
            continue;
        }
        auto est = rademacher_average(local, xs, nm, d, draws, mix_seed(seed, 0xF1, i));
        report.phi.push_back(est.estimate);
        report.std_error.push_back(est.std_error);
    }
    try {
        report.fixed_point_r = fixed_point(report.r_grid, report.phi);
        report.fixed_point_found = true;
    } catch (const std::runtime_error&) {
        report.fixed_point_found = false;
    }
    return report;
}

std::string to_csv(const ComplexityReport& report) {
    std::ostringstream os;
    os << "r,phi_hat,stderr\n";
    char buf[96];
    for (std::size_t i = 0; i < report.r_grid.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g\n", report.r_grid[i], report.phi[i],
                      report.std_error[i]);
        os << buf;
    }
    if (report.fixed_point_found) {
        std::snprintf(buf, sizeof buf, "fixed_point,%.10g,\n", report.fixed_point_r);
        os << buf;
    } else {
        os << "fixed_point,not_found,\n";
    }
    return os.str();
}

}  // namespace clusterfit::complexity
