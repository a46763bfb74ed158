#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mfg/mfgc.hpp"

using namespace mfg;
using namespace mfg::mfgc;

TEST_CASE("conjugates of the preset costs") {
    const auto q = ConvexCost::quadratic(), r = ConvexCost::quartic();
    for (double p : {-7.0, -1.0, 0.0, 0.3, 12.0}) {
        CHECK(q.conjugate_derivative(p) == doctest::Approx(p).epsilon(1e-15).scale(1.0));
        CHECK(q.conjugate(p) == doctest::Approx(p * p / 2.0).epsilon(1e-14).scale(1.0));
        // l = v^4: l' = 4 v^3, so (l*)'(p) = cbrt(p / 4)
        CHECK(r.conjugate_derivative(p) == doctest::Approx(std::cbrt(p / 4.0)).epsilon(1e-12).scale(1.0));
        // l*(p) = 3/4 |p|^{4/3} 4^{-1/3}
        CHECK(r.conjugate(p) == doctest::Approx(0.75 * std::pow(std::abs(p), 4.0 / 3.0) / std::cbrt(4.0)).epsilon(1e-10).scale(1.0));
    }
    check_convex(ConvexCost::power(1.5));
    ConvexCost bad{"concave", [](double v) { return -v * v; }, [](double v) { return -2.0 * v; }, {}, {}};
    CHECK_THROWS_AS(check_convex(bad), DomainError);
}

TEST_CASE("market curves validate their shape") {
    auto c = MarketCurve::constant(1.0, 8, {0.5});
    CHECK(c.points() == 9);
    CHECK(c.at(8) == 0.5);
    c.values.pop_back();
    CHECK_THROWS(c.validate());
    const auto f = MarketCurve::from_function(2.0, 4, [](double t) { return t * t; });
    CHECK(f.at(2) == doctest::Approx(1.0));
}

TEST_CASE("quadratic cost: fixed point -c / (1 + a)") {
    for (double a : {0.5, -0.5}) {
        const auto g = constant_a(ConvexCost::quadratic(), a, {1.0}, 1.0, 64);
        const auto fp = market_fixed_point(g, MarketCurve::constant(1.0, 64, {0.0}), FixedPointMethod::picard());
        CHECK(fp.status == FixedPointReport::Status::converged);
        for (std::size_t i = 0; i < fp.curve.points(); ++i) CHECK(fp.curve.at(i) == doctest::Approx(-1.0 / (1.0 + a)).epsilon(1e-10));
        CHECK(fixed_point_residual(g, fp.curve) <= 1e-10);
    }
    const auto g = constant_a(ConvexCost::quadratic(), -2.0, {1.0}, 1.0, 64);
    const auto start = MarketCurve::constant(1.0, 64, {0.0});
    CHECK(market_fixed_point(g, start, FixedPointMethod::picard()).status == FixedPointReport::Status::diverged);
    const auto root = market_fixed_point(g, start, FixedPointMethod::monotone_root());
    CHECK(root.curve.at(10) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("monotone root needs a one-dimensional strictly monotone map") {
    const auto g2 = constant_a(ConvexCost::quadratic(), 0.5, {1.0, 2.0}, 1.0, 16);
    CHECK_THROWS_AS(market_fixed_point(g2, MarketCurve{1.0, 16, 2, std::vector<double>(34, 0.0)},
                                       FixedPointMethod::monotone_root()),
                    DimensionError);
    // a = -1: pi - Pi(pi) = c is constant in pi
    const auto g = constant_a(ConvexCost::quadratic(), -1.0, {1.0}, 1.0, 16);
    CHECK_THROWS_AS(market_fixed_point(g, MarketCurve::constant(1.0, 16, {0.0}), FixedPointMethod::monotone_root()),
                    PreconditionError);
}

TEST_CASE("pi gap is (-a - 1) |dpi|^2 for constant a") {
    std::mt19937_64 rng(51);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (double a : {0.5, -2.0, 3.0}) {
        const auto g = constant_a(ConvexCost::quartic(), a, {0.0, 0.0});
        for (int rep = 0; rep < 20; ++rep) {
            const std::vector<double> p{u(rng), u(rng)}, p1{u(rng), u(rng)}, p2{u(rng), u(rng)};
            const double d2 = (p1[0] - p2[0]) * (p1[0] - p2[0]) + (p1[1] - p2[1]) * (p1[1] - p2[1]);
            CHECK(pi_monotonicity_gap(g, 0.3, p, p1, p2) == doctest::Approx((-a - 1.0) * d2).epsilon(1e-12).scale(1.0));
        }
    }
}

TEST_CASE("H1 form of the sigma condition has the sign of -a - 1") {
    auto pi1 = MarketCurve::from_function(1.0, 256, [](double t) { return std::sin(3.0 * t); });
    auto pi2 = MarketCurve::from_function(1.0, 256, [](double t) { return t; });
    // Pi(pi) - pi = -c - (1 + a) pi for quadratic cost, so the integrand is -(1 + a)|pi1 - pi2|^2
    double ref = 0.0;
    for (std::size_t i = 0; i <= 256; ++i) {
        const double d = pi1.at(i) - pi2.at(i);
        ref += (i == 0 || i == 256 ? 0.5 : 1.0) * d * d / 256.0;
    }
    for (double a : {0.5, -2.0}) {
        const auto g = constant_a(ConvexCost::quadratic(), a, {1.0}, 1.0, 256);
        CHECK(sigma_condition_h1(g, pi1, pi2) == doctest::Approx(-(1.0 + a) * ref).epsilon(1e-12));
    }
}

TEST_CASE("quadratic LL expression equals 2a times the squared mean gap") {
    auto ell = [](double v) { return v * v; };
    std::mt19937_64 rng(52);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int rep = 0; rep < 100; ++rep) {
        const auto m1 = DiscreteMeasure::uniform({u(rng), u(rng), u(rng)});
        const auto m2 = DiscreteMeasure::uniform({u(rng), u(rng)});
        const double a = u(rng);
        // l(v + a b1) - l(v + a b2) = a (b1 - b2)(2v + a (b1 + b2)); only the 2v term survives d(mu1 - mu2)
        const double d = mean(m1)[0] - mean(m2)[0];
        const double direct = integrate(m1, [&](double v) { return ell(v + a * mean(m1)[0]) - ell(v + a * mean(m2)[0]); }) -
                              integrate(m2, [&](double v) { return ell(v + a * mean(m1)[0]) - ell(v + a * mean(m2)[0]); });
        CHECK(ll_mfgc_expression(ell, a, m1, m2) == doctest::Approx(direct).epsilon(1e-12).scale(1.0));
        CHECK(direct == doctest::Approx(2.0 * a * d * d).epsilon(1e-10).scale(1.0));
    }
}

TEST_CASE("quartic family has mean one and changes sign") {
    const auto m = quartic_family(0.25, 3.0);
    CHECK(mean(m)[0] == doctest::Approx(1.0).epsilon(1e-14));
    auto ell = [](double v) { return v * v * v * v; };
    const double lo = ll_mfgc_expression(ell, 1.0, quartic_family(0.25, -20.0), DiscreteMeasure::dirac(0.0));
    const double hi = ll_mfgc_expression(ell, 1.0, quartic_family(0.25, 20.0), DiscreteMeasure::dirac(0.0));
    CHECK(lo * hi < 0.0);
}
