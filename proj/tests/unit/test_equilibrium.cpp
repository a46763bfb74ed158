#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mfg/equilibrium.hpp"
#include "mfg/models.hpp"

using namespace mfg;

namespace {

// Independent check that `y` is a global minimizer of the frozen problem:
// dense scan of |x - y|^2 / (2T) + g(y, sigma) on a wide window.
double scan_excess(const Scenario& s, double x, double T, double sigma, double y, double radius = 20.0) {
    const auto term = s.frozen(sigma);
    auto obj = [&](double z) { return (x - z) * (x - z) / (2.0 * T) + term.value(z); };
    double best = 1e300;
    const int n = 200000;
    for (int i = 0; i <= n; ++i) best = std::min(best, obj(x - radius + 2.0 * radius * i / n));
    return obj(y) - best;  // <= 0 up to scan resolution
}

}  // namespace

TEST_CASE("catalog rejects unknown names and parameters") {
    CHECK_THROWS_AS(catalog("nope"), DomainError);
    CHECK_THROWS_AS(catalog("cubic", {{"a", 1.0}}), DomainError);
    CHECK_THROWS_AS(catalog("bounded_moment", {{"M", -1.0}}), DomainError);
    CHECK(catalog_names().size() == 8);
}

TEST_CASE("dxG agrees with central differences of G on every catalog entry") {
    const auto m = DiscreteMeasure::uniform({-0.5, 0.3, 1.7});
    for (const auto& name : catalog_names()) {
        CAPTURE(name);
        const auto s = catalog(name);
        for (double x : {-2.3, -0.7, 0.45, 1.6, 2.9}) {
            const auto fd = dxG_fd_check(s, x, m);
            CHECK(fd.pass);
        }
    }
    CHECK_THROWS_AS(dxG_fd_check(catalog("special_unique"), 1.0, m), KinkError);
}

TEST_CASE("factored terminals: G(x, m) = g(x, sigma(m))") {
    const auto m = DiscreteMeasure::uniform({-1.0, 0.4, 2.0});
    for (const auto& name : catalog_names()) {
        const auto s = catalog(name);
        if (!s.is_factored()) continue;
        const double sig = s.sigma(m);
        for (double x : {-1.5, 0.2, 3.0}) CHECK(s.G(x, m) == doctest::Approx(s.factored->g(x, sig)).epsilon(1e-14));
    }
}

TEST_CASE("special_unique minimizer table at (T, sigma, x) = (1, 0.5, 1.75)") {
    const auto s = catalog("special_unique");
    const auto set = respond(s, 1.75, 1.0, s.frozen(0.5), 0.5);
    // interior branches: y = x - 2 sigma T on (0, 1) and y = x - sigma T on (1, inf)
    REQUIRE(set.argmins.size() == 2);
    CHECK(set.argmins[0] == doctest::Approx(0.75).epsilon(1e-10));
    CHECK(set.argmins[1] == doctest::Approx(1.25).epsilon(1e-10));
    CHECK(set.value == doctest::Approx(1.25).epsilon(1e-12));
}

TEST_CASE("special_unique from delta_2 at T = 1 has the single equilibrium delta_{2/3}") {
    const auto s = catalog("special_unique");
    const auto m0 = DiscreteMeasure::dirac(2.0);
    const auto es = enumerate_equilibria(s, m0, 1.0);
    REQUIRE(es.equilibria.size() == 1);
    const auto& e = es.equilibria[0];
    CHECK(e.sigma == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(e.measure.x(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(e.multiplicity == Multiplicity::unique_certified);
    CHECK(es.scan_monotone);
    // at sigma* both 2/3 and 4/3 are optimal: the hull spans them
    const auto pr = parameter_response(s, m0, 1.0, e.sigma);
    CHECK(pr.hull.lo == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
    CHECK(pr.hull.hi == doctest::Approx(4.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("mass split at x = 1 + 3 sigma T / 2 reproduces sigma") {
    const auto s = catalog("special_unique");
    const double sigma = 0.75;
    const auto m0 = DiscreteMeasure::dirac(1.0 + 1.5 * sigma);
    const auto ms = mass_split_fraction(s, m0, 1.0, sigma);
    REQUIRE_FALSE(ms.independent);
    // (1 - c)(x - 2 sigma) + c (x - sigma) = sigma
    const double x = 1.0 + 1.5 * sigma;
    const double c = (sigma - (x - 2.0 * sigma)) / sigma;
    CHECK(ms.c == doctest::Approx(c).epsilon(1e-9));
    CHECK(ms.reproduced_sigma == doctest::Approx(sigma).epsilon(1e-9));
    CHECK(mass_split_fraction(s, DiscreteMeasure::uniform({0.0, 3.0}), 1.0, 0.75).independent);
}

TEST_CASE("linear_in_x from delta_0 has the unique equilibrium delta_0") {
    const auto es = enumerate_equilibria(catalog("linear_in_x"), DiscreteMeasure::dirac(0.0), 1.0);
    REQUIRE(es.equilibria.size() == 1);
    CHECK(std::abs(es.equilibria[0].sigma) <= 1e-10);
    CHECK(std::abs(es.equilibria[0].measure.x(0)) <= 1e-10);
}

TEST_CASE("two-equilibria horizon recipe dips below phi(x0)") {
    const auto s = catalog("ll_two_equilibria");
    const auto h = two_equilibria_horizon(s);
    const auto& phi = s.factored->stat.psi;
    CHECK(h.y_star > 1e-3);
    CHECK(h.y_star * h.y_star / (2.0 * h.tau) + phi(h.y_star) < phi(0.0));
    CHECK(h.T == doctest::Approx(h.tau / phi(h.y_star)).epsilon(1e-15));
    const auto es = enumerate_equilibria(s, DiscreteMeasure::dirac(0.0), h.T);
    REQUIRE(es.equilibria.size() == 2);
    CHECK(es.equilibria[0].measure.x(0) == doctest::Approx(-es.equilibria[1].measure.x(0)).epsilon(1e-9));
}

TEST_CASE("bisection on an interval-valued nonincreasing map") {
    // sigma = cos(sigma) on [0, 1]
    BisectionOptions o;
    o.tol = 0.0;
    o.bracket = {0.0, 1.0};
    const auto fp = fixed_point_bisection([](double s) { return Interval{std::cos(s), std::cos(s)}; }, o);
    CHECK(fp.sigma == doctest::Approx(0.73908513321516067).epsilon(1e-15));
    // a jump: E = 1 below 0.5, 0 above, [0, 1] at 0.5; the root is the jump
    const auto jump = fixed_point_bisection(
        [](double s) { return s < 0.5 ? Interval{1.0, 1.0} : (s > 0.5 ? Interval{0.0, 0.0} : Interval{0.0, 1.0}); },
        o);
    CHECK(jump.sigma == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("Picard reports divergence and converges with damping") {
    auto map = [](double s) { return 1.0 - 2.0 * s; };
    const auto bad = fixed_point_picard(map, 0.0, 1.0);
    CHECK(bad.status == PicardReport::Status::diverged);
    const auto good = fixed_point_picard(map, 0.0, 0.2);
    CHECK(good.status == PicardReport::Status::converged);
    CHECK(good.sigma == doctest::Approx(1.0 / 3.0).epsilon(1e-11));
    CHECK_THROWS_AS(fixed_point_picard([](double) { return NAN; }, 0.0), NumericalError);
}

TEST_CASE("closed-form lift X0 / (1 + T phi) for disp_phi_quadratic") {
    const auto s = catalog("disp_phi_quadratic");
    const auto space = SampleSpace::uniform(3);
    const RandomVariable x0(space, {-1.0, 0.5, 2.0}), x(space, {0.3, -2.0, 1.1});
    const double T = 0.7;
    const double m2 = (0.09 + 4.0 + 1.21) / 3.0;
    // phi(s) = s^(-1/2) for s >= 1, continued below 1 by its second-order Taylor polynomial
    const double sm = m2 / 2.0, u = 1.0 - sm;
    const double phi = sm >= 1.0 ? 1.0 / std::sqrt(sm) : 1.0 + 0.5 * u + 0.375 * u * u;
    const auto y = lifted_best_response(s, x0, T, x, SelectionPolicy::lower());
    REQUIRE(y.size() == 1);
    for (std::size_t w = 0; w < 3; ++w) CHECK(y[0].value(w) == doctest::Approx(x0.value(w) / (1.0 + T * phi)).epsilon(1e-12));
}

TEST_CASE("splitting is rejected for random-variable responses") {
    const auto s = catalog("special_unique");
    const auto space = SampleSpace::uniform(1);
    CHECK_THROWS_AS(lifted_best_response(s, RandomVariable(space, {1.0}), 1.0, RandomVariable(space, {0.5}),
                                         SelectionPolicy::split(0.5)),
                    PreconditionError);
}

TEST_CASE("property: every reported equilibrium is sigma-consistent and optimal") {
    struct Case {
        const char* name;
        std::vector<double> atoms;
        double T;
    };
    const std::vector<Case> cases{
        {"special_unique", {2.0}, 1.0},           {"special_unique", {0.0, 3.0}, 1.0},
        {"special_unique", {-1.0, 0.5, 2.5}, 0.5}, {"linear_in_x", {-1.0, 1.5}, 1.0},
        {"disp_phi_quadratic", {-3.0, 2.0}, 1.0}, {"exp_sin", {0.0, 1.0}, 1.0},
        {"bounded_moment", {0.5}, 1.0},
    };
    for (const auto& c : cases) {
        CAPTURE(c.name);
        const auto s = catalog(c.name);
        const auto m0 = DiscreteMeasure::uniform(c.atoms);
        const auto es = enumerate_equilibria(s, m0, c.T);
        REQUIRE(!es.equilibria.empty());
        for (const auto& e : es.equilibria) {
            CHECK(std::abs(s.sigma(e.measure) - e.sigma) <= 1e-8 * (1.0 + std::abs(e.sigma)));
            CHECK(e.consistency_residual == doctest::Approx(std::abs(s.sigma(e.measure) - e.sigma)).epsilon(1e-6).scale(1e-12));
            for (std::size_t i = 0; i < e.measure.size(); ++i) {
                const double x = m0.x(e.sources[i]);
                CHECK(scan_excess(s, x, c.T, e.sigma, e.measure.x(i)) <= 1e-7);
            }
        }
    }
}
