#ifndef CLUSTERFIT_DATAGEN_HPP
#define CLUSTERFIT_DATAGEN_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "clusterfit/targets.hpp"

namespace clusterfit::datagen {

enum class NoiseKind { Gaussian, Laplace };

/// Additive observation noise. `scale` is b3: the Orlicz-2 norm for the
/// gaussian kind, the Orlicz-1 norm for the laplace kind.
struct NoiseSpec {
    NoiseKind kind = NoiseKind::Gaussian;
    double scale = 0.0;
};

enum class ProcessKind { FourierGp, BoundedBump, Zero };

/// Subject-level random process. `scale` is b2; fourier-gp paths are
/// rescaled from the series' variance envelope so the Orlicz-2 contract
/// with constant b2 holds at every point. Frequencies are drawn uniformly
/// from [freq_min, freq_max] cycles per unit length.
struct ProcessSpec {
    ProcessKind kind = ProcessKind::Zero;
    double scale = 0.0;
    int n_terms = 32;
    double freq_min = 0.5;
    double freq_max = 2.5;
};

struct DesignSpec {
    enum class Kind { UniformCube, Manifold };
    Kind kind = Kind::UniformCube;
    std::string manifold_name;  // used when kind == Manifold
};

/// One realization of the subject process: a continuous function on [0,1]^d.
class ProcessPath {
public:
    double operator()(std::span<const double> x) const;

    ProcessKind kind = ProcessKind::Zero;
    int d = 1;
    // fourier-gp: one cosine per term
    std::vector<double> coeff;  // xi_k * lambda_k, post rescale
    std::vector<double> freq;   // n_terms x d, already scaled by 2*pi
    std::vector<double> phase;
    // bounded-bump
    std::vector<double> center;
    double width = 0.25;
    double amp = 0.0;
};

struct DatasetMeta {
    std::string target_description;
    ProcessSpec process;
    NoiseSpec noise;
    DesignSpec design;
    std::uint64_t seed = 0;
};

/// n subjects x m observations of (X in [0,1]^d, Y). Within a subject the
/// responses share one process path; across subjects everything is
/// independent.
struct Dataset {
    long n = 0, m = 0;
    int d = 0;
    std::vector<double> x;  // n*m*d, subject-major
    std::vector<double> y;  // n*m
    DatasetMeta meta;

    std::span<const double> point(long i, long j) const {
        return {x.data() + (i * m + j) * d, static_cast<std::size_t>(d)};
    }
    double response(long i, long j) const { return y[i * m + j]; }
    long count() const { return n * m; }
    void validate() const;
};

/// n*m*d design points; each subject's block is keyed by (seed, subject).
std::vector<double> sample_design(long n, long m, int d, const DesignSpec& design, std::uint64_t seed);

ProcessPath sample_process_path(const ProcessSpec& spec, int d, std::uint64_t seed);

std::vector<double> sample_noise(const NoiseSpec& spec, long count, std::uint64_t seed);

/// Y_ij = f(X_ij) + U_i(X_ij) + eps_ij with nm >= 3.
Dataset generate_dataset(const targets::TargetFunction& target, long n, long m, const DesignSpec& design,
                         const ProcessSpec& process, const NoiseSpec& noise, std::uint64_t seed);

struct OrliczCheck {
    double estimate = 0.0;
    double std_error = 0.0;
    bool pass = false;
};

/// Monte Carlo estimate of E[exp((|X|/b)^order)]; passes when the estimate
/// is at most 2 + 3 standard errors. Needs >= 1000 samples and order 1 or 2.
OrliczCheck check_orlicz(std::span<const double> samples, double b, int order);

}  // namespace clusterfit::datagen

#endif
