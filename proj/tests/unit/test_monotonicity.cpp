#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mfg/json_out.hpp"
#include "mfg/monotonicity.hpp"
#include "mfg/serialize.hpp"

using namespace mfg;

namespace {

DiscreteMeasure random_measure(std::mt19937_64& rng, int max_atoms = 5) {
    std::uniform_int_distribution<int> k(1, max_atoms);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::vector<double> pts(k(rng));
    for (auto& p : pts) p = u(rng);
    return DiscreteMeasure::uniform(pts);
}

SamplerConfig small_budget(std::size_t n) {
    SamplerConfig c;
    c.budget = n;
    return c;
}

}  // namespace

TEST_CASE("condition names round-trip") {
    for (auto c : {Condition::LL, Condition::D, Condition::sigma, Condition::L2, Condition::neg_sigma, Condition::neg_L2}) {
        const auto back = parse_condition(condition_name(c));
        REQUIRE(back.has_value());
        CHECK(*back == c);
    }
    CHECK(parse_condition("neg_L2") == Condition::neg_L2);
    CHECK_FALSE(parse_condition("L3").has_value());
}

TEST_CASE("ll_gap for the cubic entry is the square of the statistic gap") {
    const auto s = catalog("cubic");
    std::mt19937_64 rng(41);
    auto f = [](double x) { return x * x * x / 3.0; };
    for (int rep = 0; rep < 100; ++rep) {
        const auto m1 = random_measure(rng), m2 = random_measure(rng);
        const double d = integrate(m1, f) - integrate(m2, f);
        CHECK(ll_gap(s, m1, m2) == doctest::Approx(d * d).epsilon(1e-10).scale(1.0));
    }
}

TEST_CASE("d_gap for linear_in_x factors into statistic and mean gaps") {
    const auto s = catalog("linear_in_x");
    const auto space = SampleSpace::uniform(4);
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    auto psi = [](double x) { return x * x * x + x; };
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> a(4), b(4);
        for (auto& v : a) v = u(rng);
        for (auto& v : b) v = u(rng);
        const RandomVariable x1(space, a), x2(space, b);
        const double ds = expect(x1, psi) - expect(x2, psi);
        const double dm = expect(x1) - expect(x2);
        CHECK(d_gap(s, x1, x2) == doctest::Approx(ds * dm).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("d_gap refuses outcomes on a kink") {
    const auto s = catalog("special_unique");
    const auto space = SampleSpace::uniform(2);
    CHECK_THROWS_AS(d_gap(s, RandomVariable(space, {1.0, 2.0}), RandomVariable(space, {0.5, 3.0})), KinkError);
}

TEST_CASE("general and specialized second-order D forms agree") {
    const auto s = catalog("disp_phi_quadratic");
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int rep = 0; rep < 50; ++rep) {
        const auto m = random_measure(rng);
        std::vector<double> v(m.size());
        for (auto& x : v) x = u(rng);
        const auto f = d_second_order(s, m, v);
        REQUIRE(f.specialized.has_value());
        CHECK(f.general == doctest::Approx(*f.specialized).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("second-order D form matches a difference quotient of d_gap") {
    // For exp_sin the form at (X, Y) is the derivative of d_gap(X + hY, X) / h at h = 0.
    const auto s = catalog("exp_sin");
    const auto space = SampleSpace::uniform(3);
    const RandomVariable x(space, {-0.4, 0.9, 2.0}), y(space, {1.0, -0.5, 0.7});
    const double h = 1e-4;
    const double q = (d_gap(s, RandomVariable::combine(1.0, x, h, y), x) / (h * h) +
                      d_gap(s, RandomVariable::combine(1.0, x, -h, y), x) / (h * h)) /
                     2.0;
    CHECK(d_second_order(s, x, y).general == doctest::Approx(q).epsilon(1e-6));
}

TEST_CASE("sigma_gap for linear_in_x against the explicit response") {
    // best response y = x - T sigma, so E(sigma) = int psi(x - T sigma) dm0
    const auto s = catalog("linear_in_x");
    const auto m0 = DiscreteMeasure::uniform({-1.0, 0.5, 1.5});
    const double T = 0.8;
    auto E = [&](double sig) { return integrate(m0, [&](double x) { const double y = x - T * sig; return y * y * y + y; }); };
    std::mt19937_64 rng(44);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int rep = 0; rep < 30; ++rep) {
        const double s1 = u(rng), s2 = u(rng);
        const double expected = (E(s1) - E(s2)) * (s1 - s2) - (s1 - s2) * (s1 - s2);
        const double gap = sigma_gap(s, m0, T, s1, s2, Pick::lower(), Pick::lower());
        CHECK(gap == doctest::Approx(expected).epsilon(1e-8).scale(1.0));
        CHECK(gap <= 0.0);
    }
}

TEST_CASE("l2_gap for bounded_moment against the explicit lift") {
    // response to X is Y = X0 / (1 + T sigma(L_X)), sigma = E[1 + (X / 2M - a)^2]
    const auto s = catalog("bounded_moment");
    const auto space = SampleSpace::uniform(3);
    const RandomVariable x0(space, {1.0, 0.2, -0.6});
    const RandomVariable x1(space, {0.4, -0.8, 0.1}), x2(space, {-0.3, 0.9, 0.5});
    const double T = 1.0;
    auto sig = [](const RandomVariable& x) { return expect(x, [](double v) { return 1.0 + v * v / 4.0; }); };
    const double k1 = 1.0 / (1.0 + T * sig(x1)), k2 = 1.0 / (1.0 + T * sig(x2));
    double cross = 0.0, sq = 0.0;
    for (std::size_t w = 0; w < 3; ++w) {
        const double dy = (k1 - k2) * x0.value(w), dx = x1.value(w) - x2.value(w);
        cross += dy * dx / 3.0;
        sq += dx * dx / 3.0;
    }
    CHECK(l2_gap(s, x0, T, x1, x2, Pick::lower(), Pick::lower()) == doctest::Approx(cross - sq).epsilon(1e-12));
}

TEST_CASE("violation floor ignores roundoff") {
    Witness w;
    w.lhs = 1.0;
    w.rhs = 1.0;
    w.margin = -1e-12;
    CHECK_FALSE(violates(w));
    w.margin = -1e-6;
    CHECK(violates(w));
}

TEST_CASE("refuter finds no LL violation for the cubic entry and some for exp_sin") {
    const auto ok = refute(catalog("cubic"), Condition::LL, small_budget(500), 3);
    CHECK_FALSE(ok.violated);
    CHECK(ok.samples + ok.skipped == 500);
    const auto bad = refute(catalog("exp_sin"), Condition::D, small_budget(500), 7);
    CHECK(bad.violated);
    REQUIRE(bad.shrunk.has_value());
    CHECK(violates(*bad.shrunk));
}

TEST_CASE("property: refuter is deterministic per seed") {
    const auto s = catalog("exp_sin");
    const auto a = refute(s, Condition::LL, small_budget(300), 99);
    const auto b = refute(s, Condition::LL, small_budget(300), 99);
    CHECK(out::dump(ser::to_json(a)) == out::dump(ser::to_json(b)));
}

TEST_CASE("property: witnesses re-evaluate to the reported margin, also after a JSON round trip") {
    struct Case {
        const char* scenario;
        Condition c;
    };
    const Case cases[] = {{"exp_sin", Condition::LL}, {"exp_sin", Condition::D},        {"cubic", Condition::sigma},
                          {"cubic", Condition::L2},   {"cubic", Condition::neg_sigma}, {"disp_phi_quadratic", Condition::L2}};
    for (const auto& c : cases) {
        CAPTURE(c.scenario);
        CAPTURE(condition_name(c.c));
        const auto s = catalog(c.scenario);
        auto rep = refute(s, c.c, small_budget(400), 5);
        REQUIRE(rep.witness.has_value());
        Witness w = *rep.witness;
        const double margin = w.margin;
        CHECK(evaluate(s, w) == margin);

        const auto text = out::dump(ser::to_json(*rep.witness));
        Witness back = ser::witness_from_json(out::Json::parse(text));
        CHECK(evaluate(s, back) == doctest::Approx(margin).epsilon(1e-14).scale(1e-300));
        CHECK(violates(back) == violates(*rep.witness));
    }
}
