#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "clusterfit/funclass.hpp"
#include "clusterfit/rng.hpp"

using namespace clusterfit;
using funclass::CompositionTree;

namespace {

CompositionTree node(double s, int k, std::vector<CompositionTree> children = {}) {
    CompositionTree t;
    t.s = s;
    t.arity = k;
    t.children = std::move(children);
    return t;
}

CompositionTree random_tree(Rng& rng, int max_height, int max_arity) {
    CompositionTree t;
    t.s = rng.uniform(0.1, 4.0);
    t.arity = 1 + rng.uniform_int(max_arity);
    bool internal = max_height > 1 && rng.uniform() < 0.6;
    if (internal)
        for (int c = 0; c < t.arity; ++c) t.children.push_back(random_tree(rng, max_height - 1, max_arity));
    return t;
}

}  // namespace

TEST_CASE("harmonic mean") {
    CHECK(funclass::harmonic_mean({2.0, 2.0}) == doctest::Approx(2.0));
    CHECK(funclass::harmonic_mean({1.0, 2.0, 2.0}) == doctest::Approx(1.5));
    CHECK(funclass::harmonic_mean({0.5, 1.5}) == doctest::Approx(0.75));
    CHECK_THROWS_AS(funclass::harmonic_mean({1.0}), std::invalid_argument);
    CHECK_THROWS_AS(funclass::harmonic_mean({1.0, -2.0}), std::invalid_argument);

    // lies between min and max; equals the common value when all equal
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        int d = 2 + rng.uniform_int(5);
        std::vector<double> s(d);
        double lo = 1e9, hi = 0.0;
        for (auto& v : s) {
            v = rng.uniform(0.1, 4.0);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        double h = funclass::harmonic_mean(s);
        CHECK(h >= lo - 1e-12);
        CHECK(h <= hi + 1e-12);
    }
}

TEST_CASE("effective smoothness") {
    auto root_only = node(3.7, 2);
    CHECK(funclass::effective_smoothness(root_only, {}) == doctest::Approx(3.7));

    auto tree = node(0.5, 2, {node(3.0, 2), node(1.0, 1)});
    CHECK(funclass::effective_smoothness(tree, {0}) == doctest::Approx(1.5));  // 3 * min(1, 0.5)

    auto smooth = node(2.0, 1, {node(2.0, 1)});
    CHECK(funclass::effective_smoothness(smooth, {0}) == doctest::Approx(2.0));  // min(1,2) = 1

    CHECK_THROWS_AS(funclass::effective_smoothness(tree, {2}), std::invalid_argument);
    CHECK_THROWS_AS(funclass::effective_smoothness(tree, {0, 0}), std::invalid_argument);

    // eff <= own s; equality when all ancestors have s >= 1
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        auto t = random_tree(rng, 4, 3);
        std::vector<int> path;
        const CompositionTree* cur = &t;
        bool all_anc_smooth = true;
        while (!cur->children.empty() && rng.uniform() < 0.7) {
            all_anc_smooth = all_anc_smooth && cur->s >= 1.0;
            int c = rng.uniform_int(static_cast<int>(cur->children.size()));
            path.push_back(c);
            cur = &cur->children[c];
        }
        double eff = funclass::effective_smoothness(t, path);
        CHECK(eff <= cur->s + 1e-12);
        if (all_anc_smooth) CHECK(eff == doctest::Approx(cur->s));
    }
}

TEST_CASE("gamma: direct equals recursive exactly") {
    CHECK(funclass::gamma_direct(node(2.0, 3)) == doctest::Approx(2.0 / 3.0));

    auto tree = node(0.5, 2, {node(3.0, 2), node(1.0, 1)});
    CHECK(funclass::gamma_direct(tree) == doctest::Approx(0.25));  // ratios 0.25, 0.75, 0.5
    CHECK(funclass::gamma_recursive(tree) == funclass::gamma_direct(tree));

    auto chain = node(2.0, 1, {node(2.0, 1)});
    CHECK(funclass::gamma_direct(chain) == doctest::Approx(2.0));

    Rng rng(13);
    for (int trial = 0; trial < 1000; ++trial) {
        auto t = random_tree(rng, 5, 4);
        CHECK(funclass::gamma_direct(t) == funclass::gamma_recursive(t));
    }
}

TEST_CASE("minimax rate") {
    CHECK(funclass::minimax_rate(1, 1, 0.7) == doctest::Approx(2.0));
    // ratio s/d = 2: exponent 2s/(2s+d) = 4/5
    CHECK(funclass::minimax_rate(10, 10, 2.0) == doctest::Approx(0.1 + std::pow(100.0, -0.8)).epsilon(1e-12));
    CHECK(funclass::minimax_rate(10, 10, 2.0) == doctest::Approx(0.125118864315).epsilon(1e-9));

    Rng rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        long n = 1 + rng.uniform_int(500), m = 1 + rng.uniform_int(50);
        double ratio = rng.uniform(0.2, 3.0);
        CHECK(funclass::minimax_rate(2 * n, m, ratio) < funclass::minimax_rate(n, m, ratio));
        CHECK(funclass::minimax_rate(n, 2 * m, ratio) <= funclass::minimax_rate(n, m, ratio));
        CHECK(funclass::minimax_rate(n, m, ratio) >= 1.0 / static_cast<double>(n));
    }
}

TEST_CASE("phase transition point") {
    CHECK(funclass::phase_transition_m(100, 1.0) == doctest::Approx(10.0));  // s=2, d=2
    CHECK(funclass::phase_transition_m(256, 2.0) == doctest::Approx(4.0));   // s=2, d=1
    // increasing d at fixed s increases the output (ratio falls)
    CHECK(funclass::phase_transition_m(100, 2.0 / 3.0) > funclass::phase_transition_m(100, 2.0));

    // above the transition the (nm)-term is below the n^{-1} term
    Rng rng(19);
    for (int trial = 0; trial < 200; ++trial) {
        long n = 2 + rng.uniform_int(1000);
        double ratio = rng.uniform(0.3, 3.0);
        long m = static_cast<long>(std::ceil(funclass::phase_transition_m(n, ratio))) + 1;
        double nm_term = std::pow(static_cast<double>(n) * m, -2.0 * ratio / (2.0 * ratio + 1.0));
        CHECK(nm_term <= 1.0 / static_cast<double>(n) + 1e-15);
    }
}

TEST_CASE("network budget") {
    CHECK(funclass::network_budget(100, 100, 2.0, 10.0) == 4);
    CHECK_THROWS_AS(funclass::network_budget(1, 2, 1.0, 1.0), std::invalid_argument);

    Rng rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        long n = 2 + rng.uniform_int(500), m = 2 + rng.uniform_int(20);
        double ratio = rng.uniform(0.3, 3.0), c = rng.uniform(0.1, 20.0);
        long b = funclass::network_budget(n, m, ratio, c);
        CHECK(b >= 3);
        CHECK(funclass::network_budget(n, m, ratio, 2.0 * c) >= b);
    }
}

TEST_CASE("rate model per regime") {
    funclass::SmoothnessSpec iso{funclass::Isotropic{2.0, 1}, 1.0, 1.0};
    CHECK(funclass::rate_model(iso).exponent_ratio == doctest::Approx(2.0));
    CHECK(funclass::rate_model(iso).log_power == doctest::Approx(16.0 * 2.0 / 5.0));

    funclass::SmoothnessSpec aniso{funclass::Anisotropic{{1.0, 2.0, 2.0}}, 1.0, 1.0};
    CHECK(funclass::rate_model(aniso).exponent_ratio == doctest::Approx(0.5));  // s~=1.5, d=3

    funclass::SmoothnessSpec comp{
        funclass::Composition{node(0.5, 2, {node(3.0, 2), node(1.0, 1)}), 2}, 1.0, 1.0};
    CHECK(funclass::rate_model(comp).exponent_ratio == doctest::Approx(0.25));

    funclass::SmoothnessSpec mani{funclass::Manifold{2.0, 3, 1}, 1.0, 1.0};
    CHECK(funclass::rate_model(mani).exponent_ratio == doctest::Approx(2.0));
}

TEST_CASE("tree validation") {
    auto bad = node(1.0, 2, {node(1.0, 1)});  // arity 2, one child
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    CHECK_THROWS_AS(node(-1.0, 1).validate(), std::invalid_argument);
    CHECK(node(1.0, 3).height() == 1);
    CHECK(node(1.0, 2, {node(1.0, 1), node(1.0, 1)}).height() == 2);
}
