#ifndef CLUSTERFIT_RELUNET_HPP
#define CLUSTERFIT_RELUNET_HPP

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace clusterfit::relunet {

/// Truncated fully connected ReLU network. Layer i is an affine map from
/// width_i to width_{i+1} (width_0 = input_dim, width_{depth+1} = 1) with
/// ReLU between layers and output clamped to [-truncation, truncation].
struct MLP {
    int input_dim = 1;
    std::vector<int> widths;                  // hidden widths W_1..W_L
    std::vector<std::vector<double>> weight;  // depth+1 matrices, row-major out x in
    std::vector<std::vector<double>> bias;    // depth+1 vectors
    double truncation = 1.0;                  // beta > 0

    int depth() const { return static_cast<int>(widths.size()); }
    void validate() const;
};

/// Exact value of relu(v+beta) - relu(v-beta) - beta, i.e. clamp(v, -beta, beta).
/// Evaluated piecewise so the identity holds with no floating-point slack.
double truncate(double v, double beta);

/// Affine/ReLU composition followed by truncation. Rejects inputs whose
/// dimension differs from the net's.
double forward(const MLP& net, std::span<const double> x);

/// Same composition without the final truncation.
double forward_pretrunc(const MLP& net, std::span<const double> x);

/// He-style init: weights uniform on [-sqrt(2/fan_in), sqrt(2/fan_in)],
/// biases zero, all hidden widths equal to `width`.
MLP init_mlp(int input_dim, int depth, int width, double beta, std::uint64_t seed);

/// Exact count of weight and bias scalars.
long param_count(const MLP& net);

/// Upper bound (L+1)W(W+1) + (d+1)W that param_count never exceeds.
long param_count_bound(int input_dim, int depth, int width);

struct Gradients {
    std::vector<std::vector<double>> weight;
    std::vector<std::vector<double>> bias;
    double risk = 0.0;  // mean squared loss over the batch
};

/// Exact reverse-mode gradients of (1/B) sum_s (f(x_s) - y_s)^2.
/// ReLU subgradient at 0 is 0; the truncation gradient is 0 where
/// |pre-truncation| > beta and 1 otherwise. xs is batch-major, B x d flat.
Gradients backward(const MLP& net, std::span<const double> xs, std::span<const double> ys);

/// Portable text format: header (d, depth, widths, beta), then row-major
/// weights and biases with 17 significant digits (doubles round-trip).
std::string to_text(const MLP& net);
MLP from_text(const std::string& text);

/// Splits a total size budget evenly between depth and width on the log
/// scale; both are clamped below at 3 so theorem-sized classes stay valid.
std::pair<int, int> expand_budget(long budget);

/// Embeds a net into a larger architecture computing exactly the same
/// function: weights land in the top-left blocks, padding is zero, and the
/// extra depth passes activations through identity blocks (post-ReLU values
/// are nonnegative, so ReLU is transparent there). Needs depth >= src depth
/// and width >= every src width.
MLP embed(const MLP& src, int depth, int width);

// -- internals shared with the trainer --------------------------------------

/// Per-net scratch reused across samples to keep training allocation-free.
struct Workspace {
    std::vector<std::vector<double>> act;    // post-ReLU activations per hidden layer
    std::vector<std::vector<double>> delta;  // backprop buffers
    void resize(const MLP& net);
};

/// Forward for one sample using `ws`; returns the truncated output and the
/// pre-truncation value through `pre`.
double forward_ws(const MLP& net, const double* x, Workspace& ws, double& pre);

/// Adds one sample's gradient of (f(x)-y)^2 (unnormalized) into `grad`.
/// Returns the squared residual.
double accumulate_gradient(const MLP& net, const double* x, double y, Workspace& ws, Gradients& grad);

}  // namespace clusterfit::relunet

#endif
