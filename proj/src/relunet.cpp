#include "clusterfit/relunet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "clusterfit/rng.hpp"

namespace clusterfit::relunet {

namespace {

int layer_in(const MLP& net, int layer) { return layer == 0 ? net.input_dim : net.widths[layer - 1]; }
int layer_out(const MLP& net, int layer) {
    return layer == net.depth() ? 1 : net.widths[layer];
}

}  // namespace

void MLP::validate() const {
    if (input_dim < 1) throw std::invalid_argument("mlp: input_dim must be >= 1");
    if (!(truncation > 0.0)) throw std::invalid_argument("mlp: truncation must be > 0");
    if (weight.size() != widths.size() + 1 || bias.size() != widths.size() + 1)
        throw std::invalid_argument("mlp: need depth+1 affine layers");
    for (int l = 0; l <= depth(); ++l) {
        long in = layer_in(*this, l), out = layer_out(*this, l);
        if (l < depth() && widths[l] < 1) throw std::invalid_argument("mlp: widths must be >= 1");
        if (static_cast<long>(weight[l].size()) != in * out ||
            static_cast<long>(bias[l].size()) != out)
            throw std::invalid_argument("mlp: affine layer shape mismatch");
        for (double w : weight[l])
            if (!std::isfinite(w)) throw std::invalid_argument("mlp: weights must be finite");
        for (double b : bias[l])
            if (!std::isfinite(b)) throw std::invalid_argument("mlp: biases must be finite");
    }
}

double truncate(double v, double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("truncate: beta must be > 0");
    // relu(v+beta) - relu(v-beta) - beta collapses to one of three linear
    // pieces; evaluating the active piece keeps the identity with clamp exact
    if (v > beta) return beta;    // (v+beta) - (v-beta) - beta
    if (v < -beta) return -beta;  // 0 - 0 - beta
    return v;                     // (v+beta) - 0 - beta
}

void Workspace::resize(const MLP& net) {
    act.assign(net.depth(), {});
    delta.assign(net.depth(), {});
    for (int l = 0; l < net.depth(); ++l) {
        act[l].assign(net.widths[l], 0.0);
        delta[l].assign(net.widths[l], 0.0);
    }
}

double forward_ws(const MLP& net, const double* x, Workspace& ws, double& pre) {
    const double* in = x;
    int in_dim = net.input_dim;
    for (int l = 0; l < net.depth(); ++l) {
        const double* w = net.weight[l].data();
        const double* b = net.bias[l].data();
        double* out = ws.act[l].data();
        int out_dim = net.widths[l];
        for (int i = 0; i < out_dim; ++i) {
            double s = b[i];
            const double* row = w + static_cast<long>(i) * in_dim;
            for (int j = 0; j < in_dim; ++j) s += row[j] * in[j];
            out[i] = s > 0.0 ? s : 0.0;
        }
        in = out;
        in_dim = out_dim;
    }
    const double* w = net.weight[net.depth()].data();
    double s = net.bias[net.depth()][0];
    for (int j = 0; j < in_dim; ++j) s += w[j] * in[j];
    pre = s;
    return truncate(s, net.truncation);
}

double forward(const MLP& net, std::span<const double> x) {
    if (static_cast<int>(x.size()) != net.input_dim)
        throw std::invalid_argument("forward: input dimension mismatch");
    Workspace ws;
    ws.resize(net);
    double pre = 0.0;
    return forward_ws(net, x.data(), ws, pre);
}

double forward_pretrunc(const MLP& net, std::span<const double> x) {
    if (static_cast<int>(x.size()) != net.input_dim)
        throw std::invalid_argument("forward_pretrunc: input dimension mismatch");
    Workspace ws;
    ws.resize(net);
    double pre = 0.0;
    forward_ws(net, x.data(), ws, pre);
    return pre;
}

MLP init_mlp(int input_dim, int depth, int width, double beta, std::uint64_t seed) {
    if (depth < 1 || width < 1) throw std::invalid_argument("init_mlp: need depth, width >= 1");
    if (input_dim < 1) throw std::invalid_argument("init_mlp: need input_dim >= 1");
    if (!(beta > 0.0)) throw std::invalid_argument("init_mlp: beta must be > 0");
    MLP net;
    net.input_dim = input_dim;
    net.widths.assign(depth, width);
    net.truncation = beta;
    net.weight.resize(depth + 1);
    net.bias.resize(depth + 1);
    Rng rng(mix_seed(seed, 0x91E7, 0));
    for (int l = 0; l <= depth; ++l) {
        int in = layer_in(net, l), out = layer_out(net, l);
        double scale = std::sqrt(2.0 / static_cast<double>(in));
        net.weight[l].resize(static_cast<long>(in) * out);
        for (auto& w : net.weight[l]) w = rng.uniform(-scale, scale);
        net.bias[l].assign(out, 0.0);
    }
    return net;
}

long param_count(const MLP& net) {
    long total = 0;
    for (const auto& w : net.weight) total += static_cast<long>(w.size());
    for (const auto& b : net.bias) total += static_cast<long>(b.size());
    return total;
}

long param_count_bound(int input_dim, int depth, int width) {
    return static_cast<long>(depth + 1) * width * (width + 1) + static_cast<long>(input_dim + 1) * width;
}

Gradients backward(const MLP& net, std::span<const double> xs, std::span<const double> ys) {
    if (ys.empty()) throw std::invalid_argument("backward: batch must be nonempty");
    if (xs.size() != ys.size() * static_cast<std::size_t>(net.input_dim))
        throw std::invalid_argument("backward: xs/ys shape mismatch");
    Gradients grad;
    grad.weight.resize(net.depth() + 1);
    grad.bias.resize(net.depth() + 1);
    for (int l = 0; l <= net.depth(); ++l) {
        grad.weight[l].assign(net.weight[l].size(), 0.0);
        grad.bias[l].assign(net.bias[l].size(), 0.0);
    }
    Workspace ws;
    ws.resize(net);
    double sq = 0.0;
    long batch = static_cast<long>(ys.size());
    for (long s = 0; s < batch; ++s)
        sq += accumulate_gradient(net, xs.data() + s * net.input_dim, ys[s], ws, grad);
    double inv = 1.0 / static_cast<double>(batch);
    for (auto& layer : grad.weight)
        for (auto& g : layer) g *= inv;
    for (auto& layer : grad.bias)
        for (auto& g : layer) g *= inv;
    grad.risk = sq * inv;
    return grad;
}

double accumulate_gradient(const MLP& net, const double* x, double y, Workspace& ws, Gradients& grad) {
    double pre = 0.0;
    double out = forward_ws(net, x, ws, pre);
    double residual = out - y;
    double sq = residual * residual;
    // d/d(pre) of the truncation: 0 in the saturated region, 1 inside
    double up = std::abs(pre) > net.truncation ? 0.0 : 2.0 * residual;
    if (up == 0.0) return sq;

    int depth = net.depth();
    // output layer
    {
        const double* in = depth == 0 ? x : ws.act[depth - 1].data();
        int in_dim = layer_in(net, depth);
        double* gw = grad.weight[depth].data();
        for (int j = 0; j < in_dim; ++j) gw[j] += up * in[j];
        grad.bias[depth][0] += up;
    }
    if (depth == 0) return sq;
    // delta at the last hidden layer
    {
        const double* w = net.weight[depth].data();
        double* dl = ws.delta[depth - 1].data();
        int dim = net.widths[depth - 1];
        for (int i = 0; i < dim; ++i) dl[i] = ws.act[depth - 1][i] > 0.0 ? up * w[i] : 0.0;
    }
    for (int l = depth - 1; l >= 0; --l) {
        const double* in = l == 0 ? x : ws.act[l - 1].data();
        int in_dim = layer_in(net, l);
        int out_dim = net.widths[l];
        const double* dl = ws.delta[l].data();
        double* gw = grad.weight[l].data();
        double* gb = grad.bias[l].data();
        for (int i = 0; i < out_dim; ++i) {
            double di = dl[i];
            if (di == 0.0) continue;
            double* row = gw + static_cast<long>(i) * in_dim;
            for (int j = 0; j < in_dim; ++j) row[j] += di * in[j];
            gb[i] += di;
        }
        if (l == 0) break;
        const double* w = net.weight[l].data();
        double* dprev = ws.delta[l - 1].data();
        for (int j = 0; j < in_dim; ++j) {
            double s = 0.0;
            for (int i = 0; i < out_dim; ++i) s += dl[i] * w[static_cast<long>(i) * in_dim + j];
            dprev[j] = ws.act[l - 1][j] > 0.0 ? s : 0.0;
        }
    }
    return sq;
}

std::string to_text(const MLP& net) {
    net.validate();
    std::ostringstream os;
    os << "mlp 1\n" << net.input_dim << ' ' << net.depth();
    for (int w : net.widths) os << ' ' << w;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", net.truncation);
    os << '\n' << buf << '\n';
    for (int l = 0; l <= net.depth(); ++l) {
        for (std::size_t i = 0; i < net.weight[l].size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", net.weight[l][i]);
            os << buf << (i + 1 == net.weight[l].size() ? "" : " ");
        }
        os << '\n';
        for (std::size_t i = 0; i < net.bias[l].size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", net.bias[l][i]);
            os << buf << (i + 1 == net.bias[l].size() ? "" : " ");
        }
        os << '\n';
    }
    return os.str();
}

MLP from_text(const std::string& text) {
    std::istringstream is(text);
    std::string magic;
    int version = 0;
    if (!(is >> magic >> version) || magic != "mlp" || version != 1)
        throw std::invalid_argument("mlp text: bad header");
    MLP net;
    int depth = 0;
    if (!(is >> net.input_dim >> depth) || depth < 0) throw std::invalid_argument("mlp text: bad shape");
    net.widths.resize(depth);
    for (auto& w : net.widths)
        if (!(is >> w)) throw std::invalid_argument("mlp text: bad widths");
    if (!(is >> net.truncation)) throw std::invalid_argument("mlp text: bad truncation");
    net.weight.resize(depth + 1);
    net.bias.resize(depth + 1);
    for (int l = 0; l <= depth; ++l) {
        long in = layer_in(net, l), out = layer_out(net, l);
        net.weight[l].resize(in * out);
        net.bias[l].resize(out);
        for (auto& w : net.weight[l])
            if (!(is >> w)) throw std::invalid_argument("mlp text: truncated weights");
        for (auto& b : net.bias[l])
            if (!(is >> b)) throw std::invalid_argument("mlp text: truncated biases");
    }
    net.validate();
    return net;
}

std::pair<int, int> expand_budget(long budget) {
    if (budget < 1) throw std::invalid_argument("expand_budget: budget must be >= 1");
    int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(budget))));
    side = std::max(side, 3);
    return {side, side};
}

MLP embed(const MLP& src, int depth, int width) {
    src.validate();
    if (depth < src.depth()) throw std::invalid_argument("embed: target depth too small");
    for (int w : src.widths)
        if (width < w) throw std::invalid_argument("embed: target width too small");
    MLP net;
    net.input_dim = src.input_dim;
    net.widths.assign(depth, width);
    net.truncation = src.truncation;
    net.weight.resize(depth + 1);
    net.bias.resize(depth + 1);
    int src_depth = src.depth();
    for (int l = 0; l < src_depth; ++l) {
        int in_new = layer_in(net, l), out_new = net.widths[l];
        int in_old = layer_in(src, l), out_old = src.widths[l];
        net.weight[l].assign(static_cast<long>(in_new) * out_new, 0.0);
        net.bias[l].assign(out_new, 0.0);
        for (int i = 0; i < out_old; ++i) {
            for (int j = 0; j < in_old; ++j)
                net.weight[l][static_cast<long>(i) * in_new + j] = src.weight[l][static_cast<long>(i) * in_old + j];
            net.bias[l][i] = src.bias[l][i];
        }
    }
    if (src_depth == 0 && depth > 0)
        throw std::invalid_argument("embed: cannot deepen a purely affine net");
    int lane = src_depth > 0 ? src.widths.back() : 0;
    for (int l = src_depth; l < depth; ++l) {
        int in_new = layer_in(net, l);
        net.weight[l].assign(static_cast<long>(in_new) * width, 0.0);
        net.bias[l].assign(width, 0.0);
        for (int i = 0; i < lane; ++i) net.weight[l][static_cast<long>(i) * in_new + i] = 1.0;
    }
    {
        int in_new = layer_in(net, depth);
        int in_old = layer_in(src, src_depth);
        net.weight[depth].assign(in_new, 0.0);
        net.bias[depth] = src.bias[src_depth];
        for (int j = 0; j < in_old; ++j) net.weight[depth][j] = src.weight[src_depth][j];
    }
    net.validate();
    return net;
}

}  // namespace clusterfit::relunet
