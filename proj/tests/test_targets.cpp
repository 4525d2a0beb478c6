#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "clusterfit/rng.hpp"
#include "clusterfit/targets.hpp"

using namespace clusterfit;

namespace {

// grid scan at 101^min(d,3) plus random points
void check_sup_bound(const targets::TargetFunction& target, std::uint64_t seed) {
    int d = target.spec.dim();
    double bound = target.spec.sup_bound + 1e-12;
    int per = 101;
    int dims = std::min(d, 3);
    std::vector<double> x(d, 0.5);
    std::vector<int> odo(dims, 0);
    for (;;) {
        for (int j = 0; j < dims; ++j) x[j] = static_cast<double>(odo[j]) / (per - 1);
        CHECK(std::abs(target.eval(x)) <= bound);
        int j = dims - 1;
        while (j >= 0 && ++odo[j] == per) odo[j--] = 0;
        if (j < 0) break;
    }
    Rng rng(seed);
    for (int t = 0; t < 10000; ++t) {
        for (int j = 0; j < d; ++j) x[j] = rng.uniform();
        CHECK(std::abs(target.eval(x)) <= bound);
    }
}

}  // namespace

TEST_CASE("kink target: pinned values") {
    auto f = targets::make_kink(1.0, 1, {0.5}, 1.0);
    double x0 = 0.5, x1 = 1.0;
    CHECK(f.eval(std::span<const double>(&x0, 1)) == doctest::Approx(0.0));
    CHECK(f.eval(std::span<const double>(&x1, 1)) == doctest::Approx(0.5));

    auto g = targets::make_kink(0.5, 2, {0.5, 0.5}, 1.0);
    std::vector<double> c{0.5, 0.5};
    CHECK(g.eval(c) == doctest::Approx(0.0));
}

TEST_CASE("isotropic targets: sup bound") {
    check_sup_bound(targets::make_isotropic(0.5, 2, 1.0, 42), 1);
    check_sup_bound(targets::make_isotropic(1.0, 1, 2.0, 43), 2);
    check_sup_bound(targets::make_isotropic(2.0, 1, 1.0, 44), 3);
    check_sup_bound(targets::make_isotropic(2.0, 3, 1.5, 45), 4);
}

TEST_CASE("kink targets: empirical Hölder quotient within certificate") {
    for (double s : {0.4, 0.7, 1.0}) {
        for (int d : {1, 2}) {
            auto f = targets::make_isotropic(s, d, 1.0, 1000 + static_cast<int>(10 * s) + d);
            double certified = 1.0 * std::pow(static_cast<double>(d), -s / 2.0);
            Rng rng(5);
            std::vector<double> a(d), b(d);
            for (int t = 0; t < 10000; ++t) {
                double dist2 = 0.0;
                for (int j = 0; j < d; ++j) {
                    a[j] = rng.uniform();
                    b[j] = rng.uniform();
                    dist2 += (a[j] - b[j]) * (a[j] - b[j]);
                }
                double dist = std::sqrt(dist2);
                if (dist < 1e-12) continue;
                double q = std::abs(f.eval(a) - f.eval(b)) / std::pow(dist, s);
                CHECK(q <= certified * (1.0 + 1e-9) + 1e-12);
            }
        }
    }
}

TEST_CASE("kink targets: quotient with a larger exponent diverges at the kink") {
    double s = 0.5, s_prime = 0.75;
    auto f = targets::make_kink(s, 1, {0.5}, 1.0);
    std::vector<double> quotients;
    for (int e = 5; e <= 15; ++e) {
        double h = std::pow(2.0, -e);
        double lo = 0.5, hi = 0.5 + h;
        double q = std::abs(f.eval(std::span<const double>(&hi, 1)) -
                            f.eval(std::span<const double>(&lo, 1))) /
                   std::pow(h, s_prime);
        if (!quotients.empty()) CHECK(q > quotients.back());
        quotients.push_back(q);
    }
    CHECK(quotients.back() / quotients.front() > 4.0);  // dyadic growth of the mismatched quotient
}

TEST_CASE("anisotropic target") {
    auto f = targets::make_anisotropic({1.0, 2.0}, 1.0, 7);
    check_sup_bound(f, 6);

    // the s_1 = 1 coordinate is (amplitude/d)-Lipschitz along e_1
    Rng rng(8);
    for (int t = 0; t < 2000; ++t) {
        std::vector<double> x{rng.uniform(), rng.uniform()};
        double step = rng.uniform(-0.2, 0.2);
        std::vector<double> y{std::clamp(x[0] + step, 0.0, 1.0), x[1]};
        double dx = std::abs(y[0] - x[0]);
        CHECK(std::abs(f.eval(y) - f.eval(x)) <= 0.5 * dx + 1e-12);
    }
    CHECK_THROWS_AS(targets::make_anisotropic({1.0}, 1.0, 1), std::invalid_argument);
}

TEST_CASE("composition target") {
    funclass::CompositionTree tree;
    tree.s = 1.0;
    tree.arity = 2;
    funclass::CompositionTree leaf;
    leaf.s = 2.0;
    leaf.arity = 1;
    tree.children = {leaf, leaf};

    auto f = targets::synthesize_composition(tree, 2, 1.0, 11);
    check_sup_bound(f, 9);

    // deterministic given (tree, amplitude, seed)
    auto g = targets::synthesize_composition(tree, 2, 1.0, 11);
    auto h = targets::synthesize_composition(tree, 2, 1.0, 12);
    Rng rng(10);
    bool any_diff_seed = false;
    for (int t = 0; t < 200; ++t) {
        std::vector<double> x{rng.uniform(), rng.uniform()};
        CHECK(f.eval(x) == g.eval(x));
        any_diff_seed = any_diff_seed || f.eval(x) != h.eval(x);
    }
    CHECK(any_diff_seed);

    // the generated spec carries its tree: gamma matches gamma_direct
    auto rate = funclass::rate_model(f.spec);
    CHECK(rate.exponent_ratio == funclass::gamma_direct(tree));

    // height-1 tree: a single primitive on [0,1]^d, same family as isotropic
    funclass::CompositionTree single;
    single.s = 2.0;
    single.arity = 2;
    auto iso_like = targets::synthesize_composition(single, 2, 1.0, 13);
    check_sup_bound(iso_like, 14);
    CHECK(funclass::rate_model(iso_like.spec).exponent_ratio == doctest::Approx(1.0));
}

TEST_CASE("manifold embeddings") {
    auto circle = targets::embed_manifold("circle-in-square", 2);
    double t0 = 0.0;
    auto p = circle.chart(std::span<const double>(&t0, 1));
    CHECK(p[0] == doctest::Approx(0.9));
    CHECK(p[1] == doctest::Approx(0.5));
    Rng rng(15);
    for (int t = 0; t < 2000; ++t) {
        double u = rng.uniform();
        auto q = circle.chart(std::span<const double>(&u, 1));
        CHECK(q.size() == 2);
        for (double v : q) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        double r = std::hypot(q[0] - 0.5, q[1] - 0.5);
        CHECK(r == doctest::Approx(0.4).epsilon(1e-12));
    }

    auto helix = targets::embed_manifold("helix-in-cube", 3);
    auto h0 = helix.chart(std::span<const double>(&t0, 1));
    CHECK(h0[0] == doctest::Approx(0.85));
    CHECK(h0[1] == doctest::Approx(0.5));
    CHECK(h0[2] == doctest::Approx(0.0));
    for (int t = 0; t < 2000; ++t) {
        double u = rng.uniform();
        auto q = helix.chart(std::span<const double>(&u, 1));
        for (double v : q) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }

    CHECK_THROWS_AS(targets::embed_manifold("moebius", 2), std::invalid_argument);
    CHECK_THROWS_AS(targets::embed_manifold("circle-in-square", 3), std::invalid_argument);
}

TEST_CASE("manifold regime rewrap") {
    auto base = targets::make_isotropic(2.0, 2, 1.0, 20);
    auto wrapped = targets::with_manifold_regime(base, 1);
    CHECK(funclass::rate_model(wrapped.spec).exponent_ratio == doctest::Approx(2.0));  // s/d_M
    std::vector<double> x{0.3, 0.6};
    CHECK(wrapped.eval(x) == base.eval(x));
}
