#include "mfg/repro.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>

#include "mfg/control.hpp"
#include "mfg/equilibrium.hpp"
#include "mfg/error.hpp"
#include "mfg/expr.hpp"
#include "mfg/mfgc.hpp"
#include "mfg/models.hpp"
#include "mfg/monotonicity.hpp"
#include "mfg/serialize.hpp"

namespace mfg::repro {

using out::Json;

Assertion le(std::string name, double lhs, double rhs) { return {std::move(name), lhs, rhs, lhs <= rhs}; }
Assertion ge(std::string name, double lhs, double rhs) { return {std::move(name), lhs, rhs, lhs >= rhs}; }
Assertion near(std::string name, double value, double target, double tol) {
    return {std::move(name), value, target, std::abs(value - target) <= tol};
}

bool CaseResult::passed() const {
    return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.pass; });
}

namespace {

constexpr double kPi = 3.141592653589793;

struct Draw {
    std::mt19937_64 gen;
    explicit Draw(std::uint64_t seed) : gen(seed) {}
    double uniform(double lo, double hi) { return lo + (hi - lo) * (static_cast<double>(gen() >> 11) * 0x1.0p-53); }
    DiscreteMeasure measure(std::size_t max_atoms, double lo, double hi) {
        const std::size_t n = 1 + static_cast<std::size_t>(gen() % max_atoms);
        std::vector<double> x(n), w(n);
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = uniform(lo, hi);
            sum += (w[i] = uniform(0.05, 1.0));
        }
        for (auto& v : w) v /= sum;
        return DiscreteMeasure(std::move(x), std::move(w));
    }
};

SamplerConfig sampler(std::size_t budget) {
    SamplerConfig c;
    c.budget = budget;
    return c;
}

CaseResult named(std::string id) {
    CaseResult r;
    r.id = std::move(id);
    return r;
}

double floor_of(const MonotonicityReport& rep) {
    if (!rep.witness) return 0.0;
    return -1e-9 * (1.0 + std::abs(rep.witness->lhs) + std::abs(rep.witness->rhs));
}

Assertion no_violation(std::string name, const MonotonicityReport& rep) {
    return {std::move(name), rep.worst_margin(), floor_of(rep), !rep.violated};
}

Assertion violation(std::string name, const MonotonicityReport& rep) {
    return {std::move(name), rep.worst_margin(), floor_of(rep), rep.violated};
}

void add_report(CaseResult& r, const std::string& key, const MonotonicityReport& rep) {
    r.results["refute"][key] = ser::to_json(rep);
}

CaseResult two_equilibria_case() {
    CaseResult r = named("prop3.2");
    const Scenario s = catalog("ll_two_equilibria");
    const auto h = two_equilibria_horizon(s);
    const EquilibriumSet es = enumerate_equilibria(s, DiscreteMeasure::dirac(0.0), h.T);
    r.results["horizon"] = {{"tau", h.tau}, {"y_star", h.y_star}, {"T", h.T}};
    r.results["equilibria"] = ser::to_json(es);
    r.assertions.push_back(near("number of equilibria", static_cast<double>(es.equilibria.size()), 2.0, 0.0));
    r.assertions.push_back(ge("|y*| exceeds 1e-3", std::abs(h.y_star), 1e-3));
    if (es.equilibria.size() == 2) {
        const auto& a = es.equilibria[0];
        const auto& b = es.equilibria[1];
        r.assertions.push_back(near("equilibria are mirror images: y_a + y_b", a.measure.x(0) + b.measure.x(0), 0.0, 1e-6));
        r.assertions.push_back(near("optimal values agree", a.atom_values[0], b.atom_values[0], 1e-9));
        r.assertions.push_back(le("value certificate (equilibrium a)", a.value_certificate, 1e-9));
        r.assertions.push_back(le("value certificate (equilibrium b)", b.value_certificate, 1e-9));
        r.assertions.push_back(near("sigma agrees across equilibria", a.sigma, b.sigma, 1e-9));
    }
    return r;
}

std::vector<double> parabola(double a, double T, std::size_t N) {
    std::vector<double> x(N + 1);
    for (std::size_t i = 0; i <= N; ++i) {
        const double t = T * static_cast<double>(i) / static_cast<double>(N);
        x[i] = 0.5 * a * t * t;
    }
    return x;
}

CaseResult running_cost_case() {
    CaseResult r = named("prop3.3");
    const double T = 1.0;
    for (double a : {1.0, -1.0}) {
        const std::string tag = a > 0 ? "a=+1" : "a=-1";
        for (std::size_t N : {std::size_t{10000}, std::size_t{5000}}) {
            const auto xi = parabola(a, T, N);
            const ElResidual e = el_residual(xi, T);
            const double bound = 10.0 / (static_cast<double>(N) * static_cast<double>(N));
            r.results["el"][tag]["N=" + std::to_string(N)] = {{"interior", e.interior}, {"terminal", e.terminal}};
            r.assertions.push_back(le("interior E-L residual < 10/N^2, " + tag + ", N=" + std::to_string(N), e.interior, bound));
            r.assertions.push_back(le("terminal residual <= T/N, " + tag + ", N=" + std::to_string(N), e.terminal,
                                      T / static_cast<double>(N)));
        }
        // Cubic perturbations vanishing at t = 0, cost against the population xi.
        const std::size_t N = 2000;
        const auto xi = parabola(a, T, N);
        const double j0 = running_cost_value(xi, xi, T);
        Draw d(a > 0 ? 33 : 34);
        double worst = std::numeric_limits<double>::infinity();
        for (int k = 0; k < 100; ++k) {
            const double c1 = d.uniform(-0.5, 0.5), c2 = d.uniform(-0.5, 0.5), c3 = d.uniform(-0.5, 0.5);
            std::vector<double> x = xi;
            for (std::size_t i = 0; i <= N; ++i) {
                const double t = T * static_cast<double>(i) / static_cast<double>(N);
                x[i] += t * (c1 + c2 * t + c3 * t * t);
            }
            worst = std::min(worst, running_cost_value(x, xi, T) - j0);
        }
        r.results["competitors"][tag] = {{"cost_xi", j0}, {"min_excess", worst}};
        r.assertions.push_back(ge("100 competitors cost no less than xi (minus 1e-6), " + tag, worst, -1e-6));
    }
    return r;
}

CaseResult parameter_map_case() {
    CaseResult r = named("prop3.5");
    const Scenario s = catalog("ll_two_equilibria");
    const auto h = two_equilibria_horizon(s);
    const DiscreteMeasure m0 = DiscreteMeasure::dirac(0.0);
    double min_step_lo = std::numeric_limits<double>::infinity(), min_step_hi = min_step_lo;
    double prev_lo = 0.0, prev_hi = 0.0;
    const int n = 64;
    for (int k = 0; k <= n; ++k) {
        const double sig = 1.0 + static_cast<double>(k) / n;
        const ParameterResponse pr = parameter_response(s, m0, h.T, sig);
        const double lo = sig - pr.hull.hi, hi = sig - pr.hull.lo;
        if (k > 0) {
            min_step_lo = std::min(min_step_lo, lo - prev_lo);
            min_step_hi = std::min(min_step_hi, hi - prev_hi);
        }
        prev_lo = lo;
        prev_hi = hi;
    }
    r.results["min_increment"] = {{"lower_endpoint", min_step_lo}, {"upper_endpoint", min_step_hi}};
    r.assertions.push_back(ge("sigma - E(sigma) strictly increasing (lower end)", min_step_lo, 1e-12));
    r.assertions.push_back(ge("sigma - E(sigma) strictly increasing (upper end)", min_step_hi, 1e-12));
    const EquilibriumSet es = enumerate_equilibria(s, m0, h.T);
    r.results["equilibria"] = ser::to_json(es);
    r.assertions.push_back(near("two equilibrium measures", static_cast<double>(es.equilibria.size()), 2.0, 0.0));
    if (es.equilibria.size() == 2) {
        r.assertions.push_back(near("one equilibrium parameter", es.equilibria[0].sigma, es.equilibria[1].sigma, 1e-9));
        r.assertions.push_back(
            ge("measures differ in W2", wasserstein2_1d(es.equilibria[0].measure, es.equilibria[1].measure), 1e-3));
    }
    SamplerConfig cfg = sampler(2000);
    cfg.m0_family = {m0};
    cfg.T_values = {h.T};
    const auto rep = refute(s, Condition::sigma, cfg, 35);
    add_report(r, "sigma", rep);
    r.assertions.push_back(no_violation("no sigma violation from delta_x0", rep));
    return r;
}

CaseResult splitting_case() {
    CaseResult r = named("thm3.7");
    const Scenario s = catalog("special_unique");
    const double T = 1.0;
    const MinimizerSet table = respond(s, 1.75, T, s.frozen(0.5), 0.5);
    r.results["minimizer_table"] = {{"argmins", table.argmins}, {"value", table.value}};
    r.assertions.push_back(near("two minimizers at (T, sigma, x) = (1, 0.5, 1.75)", static_cast<double>(table.argmins.size()), 2.0, 0.0));
    if (table.argmins.size() == 2) {
        r.assertions.push_back(near("lower minimizer 0.75", table.argmins[0], 0.75, 1e-8));
        r.assertions.push_back(near("upper minimizer 1.25", table.argmins[1], 1.25, 1e-8));
    }
    r.assertions.push_back(near("minimal value 1.25", table.value, 1.25, 1e-8));

    struct Row {
        std::string label;
        DiscreteMeasure m0;
        double sigma;
        double c;  // NaN: no splitting atom
        Interval hull;
    };
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const std::vector<Row> rows{
        {"delta_2", DiscreteMeasure::dirac(2.0), 2.0 / 3.0, 0.0, {2.0 / 3.0, 4.0 / 3.0}},
        {"half_delta_0_half_delta_3", DiscreteMeasure({0.0, 3.0}, {0.5, 0.5}), 0.75, nan, {0.75, 0.75}},
        {"delta_2.125", DiscreteMeasure::dirac(2.125), 0.75, 1.0 / 6.0, {0.625, 1.375}},
    };
    for (const auto& row : rows) {
        const EquilibriumSet es = enumerate_equilibria(s, row.m0, T);
        r.results["equilibria"][row.label] = ser::to_json(es);
        r.assertions.push_back(near("unique equilibrium, " + row.label, static_cast<double>(es.equilibria.size()), 1.0, 0.0));
        if (es.equilibria.size() != 1) continue;
        const double sig = es.equilibria[0].sigma;
        r.assertions.push_back(near("sigma*, " + row.label, sig, row.sigma, 1e-9));
        const ParameterResponse pr = parameter_response(s, row.m0, T, sig);
        r.assertions.push_back(near("E(sigma*) lower end, " + row.label, pr.hull.lo, row.hull.lo, 1e-8));
        r.assertions.push_back(near("E(sigma*) upper end, " + row.label, pr.hull.hi, row.hull.hi, 1e-8));
        const MassSplit ms = mass_split_fraction(s, row.m0, T, sig);
        r.results["split"][row.label] = {{"independent", ms.independent}, {"c", ms.c}, {"reproduced_sigma", ms.reproduced_sigma}};
        if (std::isnan(row.c)) {
            r.assertions.push_back(near("no splitting atom, " + row.label, ms.independent ? 1.0 : 0.0, 1.0, 0.0));
        } else {
            r.assertions.push_back(near("split fraction c, " + row.label, ms.c, row.c, 1e-9));
            r.assertions.push_back(near("c reproduces sigma*, " + row.label, ms.reproduced_sigma, sig, 1e-9));
        }
    }
    return r;
}

CaseResult cubic_case() {
    CaseResult r = named("sec4.1");
    const Scenario s = catalog("cubic");
    Draw d(41);
    double worst = 0.0;
    auto f = [](double x) { return x * x * x / 3.0; };
    for (int k = 0; k < 100; ++k) {
        const DiscreteMeasure m1 = d.measure(6, -2.0, 2.0), m2 = d.measure(6, -2.0, 2.0);
        const double diff = integrate(m1, f) - integrate(m2, f);
        worst = std::max(worst, std::abs(ll_gap(s, m1, m2) - diff * diff));
    }
    r.assertions.push_back(le("ll_gap = (int f d(m1 - m2))^2 on 100 pairs", worst, 1e-10));
    const ParameterResponse pr = parameter_response(s, DiscreteMeasure::dirac(1.0), 1.0, 2.0);
    std::vector<double> taus;
    for (const auto& b : pr.branches) taus.push_back(b.tau);
    std::sort(taus.begin(), taus.end());
    r.results["branch_values"] = taus;
    r.assertions.push_back(near("two branch values", static_cast<double>(taus.size()), 2.0, 0.0));
    if (taus.size() == 2) {
        r.assertions.push_back(near("branch value -1/3", taus[0], -1.0 / 3.0, 1e-9));
        r.assertions.push_back(near("branch value 1/24", taus[1], 1.0 / 24.0, 1e-9));
    }
    const SamplerConfig cfg = sampler(10000);
    for (Condition c : {Condition::sigma, Condition::neg_sigma, Condition::L2, Condition::neg_L2}) {
        const auto rep = refute(s, c, cfg, 42);
        add_report(r, condition_name(c), rep);
        r.assertions.push_back(le(condition_name(c) + " violated, margin below -1e-6", rep.worst_margin(), -1e-6));
    }
    const auto ll = refute(s, Condition::LL, cfg, 42);
    add_report(r, "LL", ll);
    r.assertions.push_back(no_violation("no LL violation at budget 1e4", ll));
    return r;
}

CaseResult displacement_case() {
    CaseResult r = named("sec4.2");
    const Scenario s = catalog("disp_phi_quadratic");
    const FactoredTerminal& f = *s.factored;
    double worst = 0.0;
    for (int k = 0; k <= 990; ++k) {
        const double sig = 1.0 + 0.1 * k;
        const double phi = f.dxx(0.0, sig), dphi = f.dxs(1.0, sig);
        worst = std::max(worst, std::abs(phi + 2.0 * sig * dphi));
    }
    r.assertions.push_back(le("phi = -2 sigma phi' for phi = sigma^(-1/2) on [1, 100]", worst, 1e-12));
    {
        SamplerConfig cfg = sampler(1000);
        const auto rep = refute(s, Condition::D, cfg, 43);
        add_report(r, "D", rep);
        r.assertions.push_back(ge("d_gap >= -1e-10 on 1e3 couples", rep.worst_margin(), -1e-10));
    }
    // m0 = delta_5, T = 1: T / (2 (1 + T)^3) * 25 > 1.
    const DiscreteMeasure m0 = DiscreteMeasure::dirac(5.0);
    const double gap = sigma_gap(s, m0, 1.0, 1.002, 1.001, Pick::lower(), Pick::lower());
    r.assertions.push_back(ge("sigma violated near sigma = 1 for delta_5", gap, 1e-9));
    // X0 = 8, X = 1.5 X0 / 8, Y = X0 / 8.
    const auto one = SampleSpace::uniform(1);
    const RandomVariable x0(one, {8.0}), x(one, {1.5}), xe(one, {1.5 + 1e-3});
    const double l2 = l2_gap(s, x0, 1.0, xe, x, Pick::lower(), Pick::lower());
    r.assertions.push_back(ge("L2 violated for X0 = 8, alpha = 1.5", l2, 1e-9));
    r.results["violations"] = {{"sigma_gap", gap}, {"l2_gap", l2}};
    // Closed-form lift against outcome-wise grid minimization.
    ResponseOptions grid;
    grid.mode = ResponseMode::global_grid;
    Draw d(44);
    double err = 0.0;
    for (int k = 0; k < 20; ++k) {
        const auto space = SampleSpace::uniform(3);
        std::vector<double> a(3), b(3);
        for (auto& v : a) v = d.uniform(-5.0, 5.0);
        for (auto& v : b) v = d.uniform(-5.0, 5.0);
        const RandomVariable X0(space, a), X(space, b);
        const double phi = f.dxx(0.0, 0.5 * expect(X, [](double v) { return v * v; }));
        const auto Y = lifted_best_response(s, X0, 1.0, X, SelectionPolicy::lower(), grid)[0];
        for (std::size_t w = 0; w < 3; ++w) err = std::max(err, std::abs(Y.value(w) - a[w] / (1.0 + phi)));
    }
    r.assertions.push_back(le("lift X0 / (1 + T phi) matches grid minimization", err, 1e-9));
    return r;
}

CaseResult exp_sin_case() {
    CaseResult r = named("sec4.3");
    const Scenario s = catalog("exp_sin");
    const auto two = SampleSpace::uniform(2);
    // X = +-2 n pi with n = 1, Y = e^{X/2}
    const RandomVariable X(two, {-2.0 * kPi, 2.0 * kPi}), Y(two, {std::exp(-kPi), std::exp(kPi)});
    const double dform = d_second_order(s, X, Y).general;
    r.results["d_form"] = dform;
    r.assertions.push_back(near("D form at n = 1 equals 2 - cosh(pi)", dform, 2.0 - std::cosh(kPi), 1e-3));
    r.assertions.push_back(le("D form below -1", dform, -1.0));
    const auto one = SampleSpace::uniform(1);
    const double ll = ll_second_order(s, RandomVariable(one, {0.0}), RandomVariable(one, {1.0}));
    r.results["ll_form"] = ll;
    r.assertions.push_back(near("LL form at X = 0, Y = 1", ll, -1.0, 0.0));
    const SamplerConfig cfg = sampler(10000);
    for (Condition c : {Condition::LL, Condition::D}) {
        const auto rep = refute(s, c, cfg, 7);
        add_report(r, condition_name(c), rep);
        r.assertions.push_back(le(condition_name(c) + " refuted with margin <= -1", rep.worst_margin(), -1.0));
    }
    return r;
}

CaseResult bounded_moment_case() {
    CaseResult r = named("sec4.4");
    const Scenario s = catalog("bounded_moment", {{"M", 1.0}, {"a", 0.0}});
    const double T = 1.0;
    const DiscreteMeasure m0 = DiscreteMeasure::dirac(1.0);
    double err = 0.0;
    for (int k = 0; k <= 100; ++k) {
        const double sig = 1.0 + 0.05 * k;
        const double omega = 1.0 + std::pow(1.0 / (2.0 * (1.0 + T * sig)), 2);
        const ParameterResponse pr = parameter_response(s, m0, T, sig);
        err = std::max(err, std::abs(pr.hull.lo - omega));
    }
    r.assertions.push_back(le("Omega(sigma) closed form on a sigma grid", err, 1e-10));
    SamplerConfig cfg = sampler(10000);
    cfg.m0_family = {m0};
    cfg.T_values = {T};
    cfg.close_pair_fraction = 0.0;
    const auto rep = refute(s, Condition::L2, cfg, 45);
    add_report(r, "L2", rep);
    r.assertions.push_back(ge("l2_gap < 0 on 1e4 couples: least margin positive", rep.worst_margin(), std::numeric_limits<double>::min()));
    // a > 2 (1 + T)^2 / T + 1 / (2 (1 + T)) = 8.25
    const Scenario big = catalog("bounded_moment", {{"M", 1.0}, {"a", 9.0}});
    const double gap = sigma_gap(big, m0, T, 1.001, 1.0, Pick::lower(), Pick::lower());
    r.results["large_a_sigma_gap"] = gap;
    r.assertions.push_back(ge("sigma violated for a = 9 near sigma = 1", gap, 1e-9));
    return r;
}

CaseResult linear_in_x_case() {
    CaseResult r = named("sec4.5");
    const Scenario s = catalog("linear_in_x");
    const auto two = SampleSpace::uniform(2);
    const double x2 = std::sqrt(2.0);
    auto dpsi = [](double x) { return 3.0 * x * x + 1.0; };
    const RandomVariable X(two, {0.0, x2}), Y(two, {-dpsi(0.0) - dpsi(x2), 2.0 * dpsi(0.0)});
    const double form = ll_second_order(s, X, Y);
    const double closed = -0.25 * dpsi(0.0) * std::pow(dpsi(0.0) - dpsi(x2), 2);
    r.results["two_point_form"] = form;
    r.assertions.push_back(near("E[psi'(X) Y] E[Y] = -9", form, -9.0, 1e-12));
    r.assertions.push_back(near("matches -psi'(x1)(psi'(x1) - psi'(x2))^2 / 4", form, closed, 1e-12));
    const SamplerConfig cfg = sampler(10000);
    const auto sig = refute(s, Condition::sigma, cfg, 46);
    add_report(r, "sigma", sig);
    r.assertions.push_back(no_violation("no sigma violation on 1e4 pairs", sig));
    for (Condition c : {Condition::LL, Condition::D, Condition::L2}) {
        const auto rep = refute(s, c, cfg, 46);
        add_report(r, condition_name(c), rep);
        r.assertions.push_back(violation(condition_name(c) + " violated", rep));
    }
    return r;
}

CaseResult shock_case() {
    CaseResult r = named("appendixA");
    const auto gauss = expr::Expression::parse(expr::preset_text("gauss-well")).function();
    const ShockSearch found = find_shock(gauss);
    r.results["steps"] = found.steps;
    r.assertions.push_back(near("certificate found", found.certificate ? 1.0 : 0.0, 1.0, 0.0));
    if (found.certificate) {
        const auto& c = *found.certificate;
        r.results["certificate"] = ser::to_json(c);
        r.assertions.push_back(ge("minimizers separated by more than 0.1", c.y_upper - c.y_lower, 0.1));
        r.assertions.push_back(le("value gap below 1e-8", std::abs(c.value_upper - c.value_lower), 1e-8));
        r.assertions.push_back(le("minimizers symmetric about 0 within 1e-6", std::abs(c.y_upper + c.y_lower), 1e-6));
        auto psi = [&](double y) { return y * y / (2.0 * c.t) + gauss(y); };
        double prev = -std::numeric_limits<double>::infinity(), worst = 0.0;
        for (int k = 0; k < 100; ++k) {
            const double a = -2.0 + 4.0 * k / 99.0;
            const double F = coordinate_F(a, psi, 10.0).value;
            worst = std::min(worst, F - prev);
            prev = F;
        }
        r.assertions.push_back(ge("F(a) nondecreasing on a 100-point grid", worst, -1e-9));
    } else {
        r.results["reason"] = found.reason;
    }
    const auto convex = expr::Expression::parse(expr::preset_text("convex-quadratic")).function();
    const ShockSearch none = find_shock(convex);
    r.results["convex_reason"] = none.reason;
    r.assertions.push_back(near("no shock for the convex preset", none.certificate ? 1.0 : 0.0, 0.0, 0.0));
    return r;
}

CaseResult market_quadratic_case() {
    CaseResult r = named("mfgc-quadratic");
    using namespace mfgc;
    for (double a : {0.5, -2.0}) {
        const Game g = constant_a(ConvexCost::quadratic(), a, {1.0});
        const MarketCurve start = MarketCurve::constant(g.T, g.N, {0.0});
        const std::string tag = "a=" + out::format_double(a);
        const double target = -1.0 / (1.0 + a);
        if (a > -1.0) {
            const auto fp = market_fixed_point(g, start, FixedPointMethod::picard(1.0));
            r.results[tag] = {{"status", status_name(fp.status)}, {"pi0", fp.curve.at(0)}, {"iterations", fp.iterations}};
            r.assertions.push_back(near("Picard converges, " + tag, fp.status == FixedPointReport::Status::converged ? 1.0 : 0.0, 1.0, 0.0));
            r.assertions.push_back(near("pi = -c / (1 + a), " + tag, fp.curve.at(g.N / 2), target, 1e-9));
        } else {
            const auto fp = market_fixed_point(g, start, FixedPointMethod::monotone_root());
            const auto pc = market_fixed_point(g, start, FixedPointMethod::picard(1.0));
            r.results[tag] = {{"monotone_root_pi0", fp.curve.at(0)}, {"picard_status", status_name(pc.status)},
                              {"picard_iterations", pc.iterations}};
            r.assertions.push_back(near("monotone root pi = -c / (1 + a), " + tag, fp.curve.at(g.N / 2), target, 1e-9));
            r.assertions.push_back(le("fixed-point residual, " + tag, fp.residual, 1e-9));
            r.assertions.push_back(near("Picard reports divergence, " + tag, pc.status == FixedPointReport::Status::diverged ? 1.0 : 0.0, 1.0, 0.0));
        }
        const double gap = pi_monotonicity_gap(g, 0.0, {-1.0}, {0.3}, {-0.2});
        r.assertions.push_back(near("pi gap = (-a - 1) |dpi|^2, " + tag, gap, (-a - 1.0) * 0.25, 1e-15));
        const MarketCurve p1 = MarketCurve::from_function(g.T, g.N, [](double t) { return std::sin(3.0 * t); });
        const MarketCurve p2 = MarketCurve::from_function(g.T, g.N, [](double t) { return t * t - 0.5; });
        const double h1 = sigma_condition_h1(g, p1, p2);
        r.assertions.push_back(a < -1.0 ? ge("H1 form positive, " + tag, h1, 1e-12) : le("H1 form negative, " + tag, h1, -1e-12));
    }
    Draw d(47);
    double worst = 0.0;
    auto ell = [](double v) { return v * v; };
    for (int k = 0; k < 100; ++k) {
        const DiscreteMeasure m1 = d.measure(5, -3.0, 3.0), m2 = d.measure(5, -3.0, 3.0);
        const double a = d.uniform(-2.0, 2.0);
        const double gap = mean(m1)[0] - mean(m2)[0];
        const double closed = 2.0 * a * gap * gap;
        const double v = mfgc::ll_mfgc_expression(ell, a, m1, m2);
        worst = std::max(worst, std::abs(v - closed) / std::max(1.0, std::abs(closed)));
    }
    r.assertions.push_back(le("quadratic LL expression = 2a |mean gap|^2 on 100 pairs", worst, 1e-12));
    return r;
}

CaseResult market_quartic_case() {
    CaseResult r = named("mfgc-quartic");
    auto ell = [](double v) { return v * v * v * v; };
    const DiscreteMeasure mu2 = DiscreteMeasure::dirac(0.0);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double x : {-20.0, 20.0}) {
        const DiscreteMeasure mu1 = mfgc::quartic_family(0.25, x);
        const double v = mfgc::ll_mfgc_expression(ell, 1.0, mu1, mu2);
        const double closed = integrate(mu1, [](double u) { return 4.0 * u * u * u + 6.0 * u * u; }) + 4.0;
        r.results["x=" + out::format_double(x)] = {{"expression", v}, {"closed_form", closed}};
        r.assertions.push_back(near("expression = int (4v^3 + 6v^2) dmu1 + 4 at x = " + out::format_double(x), v, closed,
                                    1e-9 * (1.0 + std::abs(closed))));
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    r.assertions.push_back(le("a negative value occurs", lo, -1e-6));
    r.assertions.push_back(ge("a positive value occurs", hi, 1e-6));
    const auto quartic = mfgc::ConvexCost::quartic();
    double err = 0.0;
    for (double p : {-5.0, -1.0, -0.1, 0.0, 0.3, 2.0, 7.5}) err = std::max(err, std::abs(quartic.conjugate_derivative(p) - std::cbrt(p / 4.0)));
    r.assertions.push_back(le("(l*)' by inversion matches cbrt(p / 4)", err, 1e-10));
    return r;
}

using Runner = CaseResult (*)();

const std::map<std::string, Runner, std::less<>>& runners() {
    static const std::map<std::string, Runner, std::less<>> m{
        {"prop3.2", two_equilibria_case},
        {"prop3.3", running_cost_case},
        {"prop3.5", parameter_map_case},
        {"thm3.7", splitting_case},
        {"sec4.1", cubic_case},
        {"sec4.2", displacement_case},
        {"sec4.3", exp_sin_case},
        {"sec4.4", bounded_moment_case},
        {"sec4.5", linear_in_x_case},
        {"appendixA", shock_case},
        {"mfgc-quartic", market_quartic_case},
        {"mfgc-quadratic", market_quadratic_case},
    };
    return m;
}

}  // namespace

const std::vector<std::string>& case_ids() {
    static const std::vector<std::string> ids{"prop3.2", "prop3.3", "prop3.5", "thm3.7", "sec4.1", "sec4.2",
                                              "sec4.3", "sec4.4", "sec4.5", "appendixA", "mfgc-quartic", "mfgc-quadratic"};
    return ids;
}

CaseResult run_case(std::string_view id) {
    const auto& m = runners();
    const auto it = m.find(id);
    if (it == m.end()) {
        std::string known;
        for (const auto& k : case_ids()) known += (known.empty() ? "" : ", ") + k;
        throw DomainError("unknown case '" + std::string(id) + "' (known: " + known + ")");
    }
    return it->second();
}

}  // namespace mfg::repro
