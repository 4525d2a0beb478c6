#include "clusterfit/funclass.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace clusterfit::funclass {

void CompositionTree::validate() const {
    if (!(s > 0.0)) throw std::invalid_argument("composition tree: node smoothness must be > 0");
    if (arity < 1) throw std::invalid_argument("composition tree: node arity must be >= 1");
    if (!children.empty() && static_cast<int>(children.size()) != arity)
        throw std::invalid_argument("composition tree: internal node must have exactly `arity` children");
    for (const auto& c : children) c.validate();
}

int CompositionTree::node_count() const {
    int n = 1;
    for (const auto& c : children) n += c.node_count();
    return n;
}

int CompositionTree::height() const {
    int h = 0;
    for (const auto& c : children) h = std::max(h, c.height());
    return h + 1;
}

int SmoothnessSpec::dim() const {
    if (const auto* i = std::get_if<Isotropic>(&regime)) return i->d;
    if (const auto* a = std::get_if<Anisotropic>(&regime)) return static_cast<int>(a->s_vec.size());
    if (const auto* c = std::get_if<Composition>(&regime)) return c->d;
    return std::get<Manifold>(regime).d;
}

void SmoothnessSpec::validate() const {
    if (!(holder_norm_bound > 0.0)) throw std::invalid_argument("smoothness spec: M must be > 0");
    if (!(sup_bound > 0.0)) throw std::invalid_argument("smoothness spec: b1 must be > 0");
    if (const auto* i = std::get_if<Isotropic>(&regime)) {
        if (!(i->s > 0.0) || i->d < 1) throw std::invalid_argument("isotropic: need s > 0, d >= 1");
    } else if (const auto* a = std::get_if<Anisotropic>(&regime)) {
        if (a->s_vec.size() < 2) throw std::invalid_argument("anisotropic: need d >= 2");
        for (double s : a->s_vec)
            if (!(s > 0.0)) throw std::invalid_argument("anisotropic: all smoothness entries must be > 0");
    } else if (const auto* c = std::get_if<Composition>(&regime)) {
        if (c->d < 1) throw std::invalid_argument("composition: need d >= 1");
        c->tree.validate();
    } else {
        const auto& m = std::get<Manifold>(regime);
        if (!(m.s > 0.0) || m.d < 1 || m.d_m < 1 || m.d_m > m.d)
            throw std::invalid_argument("manifold: need s > 0 and 1 <= d_M <= d");
    }
}

double harmonic_mean(const std::vector<double>& s_vec) {
    if (s_vec.size() < 2) throw std::invalid_argument("harmonic_mean: anisotropic smoothness needs d >= 2");
    double inv_sum = 0.0;
    for (double s : s_vec) {
        if (!(s > 0.0)) throw std::invalid_argument("harmonic_mean: entries must be > 0");
        inv_sum += 1.0 / s;
    }
    return static_cast<double>(s_vec.size()) / inv_sum;
}

double effective_smoothness(const CompositionTree& tree, const std::vector<int>& node_path) {
    tree.validate();
    std::vector<const CompositionTree*> chain{&tree};
    const CompositionTree* node = &tree;
    for (int idx : node_path) {
        if (idx < 0 || idx >= static_cast<int>(node->children.size()))
            throw std::invalid_argument("effective_smoothness: path does not address a node");
        node = &node->children[idx];
        chain.push_back(node);
    }
    double eff = node->s;
    // discount by the ancestors, nearest first
    for (int i = static_cast<int>(chain.size()) - 2; i >= 0; --i) eff *= std::min(1.0, chain[i]->s);
    return eff;
}

namespace {

// Walks every node; the node's ratio s/K is discounted by min(1, s') over
// ancestors from the nearest outward, the same multiplication order the
// bottom-up recursion produces, so the two definitions agree bit for bit.
void gamma_direct_walk(const CompositionTree& node, std::vector<const CompositionTree*>& ancestors,
                       double& best) {
    double ratio = node.s / static_cast<double>(node.arity);
    for (auto it = ancestors.rbegin(); it != ancestors.rend(); ++it) ratio *= std::min(1.0, (*it)->s);
    best = std::min(best, ratio);
    ancestors.push_back(&node);
    for (const auto& c : node.children) gamma_direct_walk(c, ancestors, best);
    ancestors.pop_back();
}

double gamma_recursive_impl(const CompositionTree& node) {
    double g = node.s / static_cast<double>(node.arity);
    if (node.children.empty()) return g;
    double child_min = gamma_recursive_impl(node.children.front());
    for (std::size_t k = 1; k < node.children.size(); ++k)
        child_min = std::min(child_min, gamma_recursive_impl(node.children[k]));
    return std::min(g, child_min * std::min(1.0, node.s));
}

}  // namespace

double gamma_direct(const CompositionTree& tree) {
    tree.validate();
    std::vector<const CompositionTree*> ancestors;
    double best = std::numeric_limits<double>::infinity();
    gamma_direct_walk(tree, ancestors, best);
    return best;
}

double gamma_recursive(const CompositionTree& tree) {
    tree.validate();
    return gamma_recursive_impl(tree);
}

RateModel rate_model(const SmoothnessSpec& spec) {
    spec.validate();
    double ratio = 0.0;
    if (const auto* i = std::get_if<Isotropic>(&spec.regime)) {
        ratio = i->s / static_cast<double>(i->d);
    } else if (const auto* a = std::get_if<Anisotropic>(&spec.regime)) {
        ratio = harmonic_mean(a->s_vec) / static_cast<double>(a->s_vec.size());
    } else if (const auto* c = std::get_if<Composition>(&spec.regime)) {
        ratio = gamma_direct(c->tree);
    } else {
        const auto& m = std::get<Manifold>(spec.regime);
        ratio = m.s / static_cast<double>(m.d_m);
    }
    return RateModel{ratio, 16.0 * ratio / (2.0 * ratio + 1.0)};
}

double minimax_rate(long n, long m, double ratio) {
    if (n < 1 || m < 1) throw std::invalid_argument("minimax_rate: need n, m >= 1");
    if (!(ratio > 0.0)) throw std::invalid_argument("minimax_rate: ratio must be > 0");
    double nm = static_cast<double>(n) * static_cast<double>(m);
    return 1.0 / static_cast<double>(n) + std::pow(nm, -2.0 * ratio / (2.0 * ratio + 1.0));
}

double phase_transition_m(long n, double ratio) {
    if (n < 1) throw std::invalid_argument("phase_transition_m: need n >= 1");
    if (!(ratio > 0.0)) throw std::invalid_argument("phase_transition_m: ratio must be > 0");
    return std::pow(static_cast<double>(n), 1.0 / (2.0 * ratio));
}

long network_budget(long n, long m, double ratio, double c) {
    if (n < 1 || m < 1 || n * m < 3) throw std::invalid_argument("network_budget: need nm >= 3");
    if (!(ratio > 0.0) || !(c > 0.0)) throw std::invalid_argument("network_budget: ratio and c must be > 0");
    double nm = static_cast<double>(n) * static_cast<double>(m);
    double v = c * std::pow(nm, 1.0 / (4.0 * ratio + 2.0)) *
               std::pow(std::log(nm), -4.0 / (2.0 * ratio + 1.0));
    long budget = static_cast<long>(std::floor(v));
    return std::max(budget, 3L);
}

}  // namespace clusterfit::funclass
