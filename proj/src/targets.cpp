#include "clusterfit/targets.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "clusterfit/rng.hpp"

namespace clusterfit::targets {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct TrigTerm {
    double amp = 0.0;
    double phase = 0.0;
    std::vector<double> freq;  // already scaled by 2*pi
};

// Integer frequency vectors with ||k||_inf <= kmax whose first nonzero
// component is positive; k and -k span the same cosine term.
std::vector<std::vector<int>> lex_positive_freqs(int d, int kmax) {
    std::vector<std::vector<int>> out;
    std::vector<int> k(d, -kmax);
    for (;;) {
        int first_nonzero = 0;
        for (int j = 0; j < d; ++j) {
            if (k[j] != 0) {
                first_nonzero = k[j];
                break;
            }
        }
        if (first_nonzero > 0) out.push_back(k);
        int j = d - 1;
        while (j >= 0 && k[j] == kmax) k[j--] = -kmax;
        if (j < 0) break;
        ++k[j];
    }
    return out;
}

double binom_count(int j, int d) {
    // number of multi-indices alpha in N^d with |alpha| = j
    double v = 1.0;
    for (int i = 1; i <= d - 1; ++i) v *= static_cast<double>(j + i) / static_cast<double>(i);
    return v;
}

// Largest integer strictly smaller than s.
int floor_strict(double s) {
    int j = static_cast<int>(std::ceil(s)) - 1;
    return std::max(j, 0);
}

// Upper bound on the C^s norm of sum_t amp_t cos(<freq_t, x> + phase_t).
// Derivative sup bounds use |d^alpha term| <= |amp| * A^{|alpha|} with
// A = max_i |freq_i|; the top-order Hölder seminorm is bounded by
// interpolation between the sup and the Lipschitz constant.
double trig_holder_bound(double s, int d, const std::vector<TrigTerm>& terms) {
    int top = floor_strict(s);
    double theta = s - top;
    double total = 0.0;
    for (const auto& t : terms) {
        double a_inf = 1.0, g2 = 0.0;
        for (double f : t.freq) {
            a_inf = std::max(a_inf, std::abs(f));
            g2 += f * f;
        }
        double grad = std::sqrt(g2);
        double bound = 0.0;
        for (int j = 0; j <= top; ++j) bound += binom_count(j, d) * std::pow(a_inf, j);
        bound += binom_count(top, d) * std::pow(a_inf, top) * std::pow(2.0, 1.0 - theta) *
                 std::pow(std::max(grad, 1.0), theta);
        total += std::abs(t.amp) * bound;
    }
    return total;
}

std::vector<TrigTerm> draw_trig_terms(double s, int d, double amplitude, Rng& rng) {
    int kmax = d <= 2 ? 2 : 1;
    auto freqs = lex_positive_freqs(d, kmax);
    std::vector<TrigTerm> terms;
    terms.reserve(freqs.size());
    double abs_sum = 0.0;
    for (const auto& k : freqs) {
        TrigTerm t;
        double k2 = 0.0;
        t.freq.resize(d);
        for (int j = 0; j < d; ++j) {
            t.freq[j] = kTwoPi * k[j];
            k2 += static_cast<double>(k[j]) * k[j];
        }
        t.amp = rng.sign() * rng.uniform(0.5, 1.0) * std::pow(1.0 + k2, -(s + 1.0) / 2.0);
        t.phase = rng.uniform(0.0, kTwoPi);
        abs_sum += std::abs(t.amp);
        terms.push_back(std::move(t));
    }
    for (auto& t : terms) t.amp *= amplitude / abs_sum;  // sup <= amplitude, attained nowhere
    return terms;
}

double eval_trig(const std::vector<TrigTerm>& terms, std::span<const double> x) {
    double v = 0.0;
    for (const auto& t : terms) {
        double arg = t.phase;
        for (std::size_t j = 0; j < t.freq.size(); ++j) arg += t.freq[j] * x[j];
        v += t.amp * std::cos(arg);
    }
    return v;
}

double kink_holder_norm(double s, int d, const std::vector<double>& centers, double amplitude) {
    double sup = 0.0;
    for (double c : centers) sup += std::pow(std::max(c, 1.0 - c), s);
    sup *= amplitude / d;
    return sup + amplitude * std::pow(static_cast<double>(d), -s / 2.0);
}

// ---- composition ---------------------------------------------------------

// A compiled node maps its K inputs (children outputs or raw coordinates,
// all in [0,1]) into [0,1] through either a kink sum or a trig sum.
struct CompiledNode {
    double s = 1.0;
    int arity = 1;
    bool leaf = false;
    std::vector<int> pi;  // leaf coordinate selection, size arity
    std::vector<CompiledNode> children;

    bool kink = false;
    std::vector<double> centers;
    double kink_inv_max = 1.0;
    std::vector<TrigTerm> terms;
    double trig_half_inv = 1.0;

    double primitive(const double* u) const {
        if (kink) {
            double v = 0.0;
            for (int j = 0; j < arity; ++j) v += std::pow(std::abs(u[j] - centers[j]), s);
            return v * kink_inv_max;
        }
        double t = 0.0;
        for (const auto& term : terms) {
            double arg = term.phase;
            for (int j = 0; j < arity; ++j) arg += term.freq[j] * u[j];
            t += term.amp * std::cos(arg);
        }
        return 0.5 + t * trig_half_inv;
    }

    double eval(std::span<const double> x) const {
        double u[16];
        if (leaf) {
            for (int j = 0; j < arity; ++j) u[j] = x[pi[j]];
        } else {
            for (int j = 0; j < arity; ++j) u[j] = children[j].eval(x);
        }
        return primitive(u);
    }
};

CompiledNode compile_node(const funclass::CompositionTree& node, int d, std::uint64_t seed,
                          int& counter, double& max_norm) {
    if (node.arity > 16) throw std::invalid_argument("synthesize_composition: arity above 16 unsupported");
    CompiledNode out;
    out.s = node.s;
    out.arity = node.arity;
    out.leaf = node.children.empty();
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(counter++), 0xC0DE));
    if (out.leaf) {
        out.pi.resize(out.arity);
        for (int j = 0; j < out.arity; ++j) out.pi[j] = rng.uniform_int(d);
    }
    if (node.s <= 1.0) {
        out.kink = true;
        out.centers.resize(out.arity);
        double max_val = 0.0;
        for (int j = 0; j < out.arity; ++j) {
            out.centers[j] = rng.uniform(0.25, 0.75);
            max_val += std::pow(std::max(out.centers[j], 1.0 - out.centers[j]), node.s);
        }
        out.kink_inv_max = 1.0 / max_val;
        max_norm = std::max(max_norm, kink_holder_norm(node.s, out.arity, out.centers,
                                                       out.arity * out.kink_inv_max));
    } else {
        out.terms = draw_trig_terms(node.s, out.arity, 1.0, rng);
        double abs_sum = 0.0;
        for (const auto& t : out.terms) abs_sum += std::abs(t.amp);
        out.trig_half_inv = 1.0 / (2.0 * abs_sum);
        auto scaled = out.terms;
        for (auto& t : scaled) t.amp *= out.trig_half_inv;
        max_norm = std::max(max_norm, 0.5 + trig_holder_bound(node.s, out.arity, scaled));
    }
    if (!out.leaf) {
        out.children.reserve(node.children.size());
        for (const auto& c : node.children)
            out.children.push_back(compile_node(c, d, seed, counter, max_norm));
    }
    return out;
}

}  // namespace

TargetFunction make_kink(double s, int d, const std::vector<double>& centers, double amplitude) {
    if (!(s > 0.0) || s > 1.0) throw std::invalid_argument("make_kink: s must be in (0, 1]");
    if (d < 1 || static_cast<int>(centers.size()) != d)
        throw std::invalid_argument("make_kink: need one center per coordinate");
    if (!(amplitude > 0.0)) throw std::invalid_argument("make_kink: amplitude must be > 0");
    TargetFunction t;
    t.spec.regime = funclass::Isotropic{s, d};
    t.spec.sup_bound = amplitude;
    t.spec.holder_norm_bound = kink_holder_norm(s, d, centers, amplitude);
    double scale = amplitude / d;
    auto c = centers;
    t.eval = [s, c, scale](std::span<const double> x) {
        double v = 0.0;
        for (std::size_t j = 0; j < c.size(); ++j) v += std::pow(std::abs(x[j] - c[j]), s);
        return scale * v;
    };
    std::ostringstream os;
    os << "kink(s=" << s << ",d=" << d << ",amp=" << amplitude << ",centers=[";
    for (std::size_t j = 0; j < c.size(); ++j) os << (j ? "," : "") << c[j];
    os << "])";
    t.description = os.str();
    return t;
}

TargetFunction make_isotropic(double s, int d, double amplitude, std::uint64_t seed) {
    if (!(s > 0.0) || d < 1) throw std::invalid_argument("make_isotropic: need s > 0, d >= 1");
    if (!(amplitude > 0.0)) throw std::invalid_argument("make_isotropic: amplitude must be > 0");
    Rng rng(mix_seed(seed, 0x150, 0));
    if (s <= 1.0) {
        std::vector<double> centers(d);
        for (auto& c : centers) c = rng.uniform(0.25, 0.75);
        TargetFunction t = make_kink(s, d, centers, amplitude);
        t.description += " seed=" + std::to_string(seed);
        return t;
    }
    auto terms = draw_trig_terms(s, d, amplitude, rng);
    TargetFunction t;
    t.spec.regime = funclass::Isotropic{s, d};
    t.spec.sup_bound = amplitude;
    t.spec.holder_norm_bound = trig_holder_bound(s, d, terms);
    t.eval = [terms](std::span<const double> x) { return eval_trig(terms, x); };
    std::ostringstream os;
    os << "trig(s=" << s << ",d=" << d << ",amp=" << amplitude << ",terms=" << terms.size()
       << ",seed=" << seed << ")";
    t.description = os.str();
    return t;
}

TargetFunction make_anisotropic(const std::vector<double>& s_vec, double amplitude, std::uint64_t seed) {
    int d = static_cast<int>(s_vec.size());
    if (d < 2) throw std::invalid_argument("make_anisotropic: need d >= 2");
    if (!(amplitude > 0.0)) throw std::invalid_argument("make_anisotropic: amplitude must be > 0");
    // one univariate primitive per coordinate, each with range within [-1, 1]
    struct Coord {
        bool kink;
        double s;
        double center;
        std::vector<TrigTerm> terms;
    };
    std::vector<Coord> coords(d);
    double max_norm = 0.0;
    for (int j = 0; j < d; ++j) {
        if (!(s_vec[j] > 0.0)) throw std::invalid_argument("make_anisotropic: smoothness must be > 0");
        Rng rng(mix_seed(seed, 0xA15, j));
        coords[j].s = s_vec[j];
        coords[j].kink = s_vec[j] <= 1.0;
        if (coords[j].kink) {
            coords[j].center = rng.uniform(0.25, 0.75);
            max_norm = std::max(max_norm,
                                kink_holder_norm(s_vec[j], 1, {coords[j].center}, amplitude / d) * d);
        } else {
            coords[j].terms = draw_trig_terms(s_vec[j], 1, 1.0, rng);
            max_norm = std::max(max_norm, trig_holder_bound(s_vec[j], 1, coords[j].terms) * amplitude);
        }
    }
    TargetFunction t;
    t.spec.regime = funclass::Anisotropic{s_vec};
    t.spec.sup_bound = amplitude;
    t.spec.holder_norm_bound = max_norm;
    double scale = amplitude / d;
    t.eval = [coords, scale](std::span<const double> x) {
        double v = 0.0;
        for (std::size_t j = 0; j < coords.size(); ++j) {
            const auto& c = coords[j];
            if (c.kink)
                v += std::pow(std::abs(x[j] - c.center), c.s);
            else
                v += eval_trig(c.terms, std::span<const double>(&x[j], 1));
        }
        return scale * v;
    };
    std::ostringstream os;
    os << "anisotropic(s=[";
    for (int j = 0; j < d; ++j) os << (j ? "," : "") << s_vec[j];
    os << "],amp=" << amplitude << ",seed=" << seed << ")";
    t.description = os.str();
    return t;
}

TargetFunction synthesize_composition(const funclass::CompositionTree& tree, int d, double amplitude,
                                      std::uint64_t seed) {
    tree.validate();
    if (d < 1) throw std::invalid_argument("synthesize_composition: need d >= 1");
    if (!(amplitude > 0.0)) throw std::invalid_argument("synthesize_composition: amplitude must be > 0");
    int counter = 0;
    double max_norm = 0.0;
    auto root = std::make_shared<CompiledNode>(compile_node(tree, d, seed, counter, max_norm));
    TargetFunction t;
    t.spec.regime = funclass::Composition{tree, d};
    t.spec.sup_bound = amplitude;
    t.spec.holder_norm_bound = std::max(max_norm, 1e-12);
    t.eval = [root, amplitude](std::span<const double> x) {
        return amplitude * (2.0 * root->eval(x) - 1.0);
    };
    std::ostringstream os;
    os << "composition(nodes=" << tree.node_count() << ",height=" << tree.height() << ",d=" << d
       << ",amp=" << amplitude << ",seed=" << seed << ")";
    t.description = os.str();
    return t;
}

ManifoldEmbedding embed_manifold(const std::string& name, int d) {
    ManifoldEmbedding e;
    e.name = name;
    e.intrinsic_dim = 1;
    if (name == "circle-in-square") {
        if (d != 2) throw std::invalid_argument("circle-in-square requires d = 2");
        e.ambient_dim = 2;
        e.chart = [](std::span<const double> u) {
            double t = u[0];
            return std::vector<double>{0.5 + 0.4 * std::cos(kTwoPi * t), 0.5 + 0.4 * std::sin(kTwoPi * t)};
        };
    } else if (name == "helix-in-cube") {
        if (d != 3) throw std::invalid_argument("helix-in-cube requires d = 3");
        e.ambient_dim = 3;
        e.chart = [](std::span<const double> u) {
            double t = u[0];
            return std::vector<double>{0.5 + 0.35 * std::cos(2.0 * kTwoPi * t),
                                       0.5 + 0.35 * std::sin(2.0 * kTwoPi * t), t};
        };
    } else {
        throw std::invalid_argument("embed_manifold: unknown manifold '" + name + "'");
    }
    return e;
}

TargetFunction with_manifold_regime(TargetFunction target, int d_m) {
    const auto* iso = std::get_if<funclass::Isotropic>(&target.spec.regime);
    if (!iso) throw std::invalid_argument("with_manifold_regime: base target must be isotropic");
    if (d_m < 1 || d_m > iso->d) throw std::invalid_argument("with_manifold_regime: need 1 <= d_M <= d");
    target.spec.regime = funclass::Manifold{iso->s, iso->d, d_m};
    target.description += " on-manifold(d_M=" + std::to_string(d_m) + ")";
    return target;
}

}  // namespace clusterfit::targets
