#include "mfg/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

namespace mfg {

double LinearStatistic::operator()(const DiscreteMeasure& m) const { return offset + integrate(m, psi); }

double Scenario::sigma(const DiscreteMeasure& m) const {
    if (!factored) throw PreconditionError("scenario " + name + " has no parameter statistic");
    return factored->stat(m);
}

FrozenTerminal Scenario::frozen(double s) const {
    if (!factored) throw PreconditionError("scenario " + name + " has no parameter statistic");
    const FactoredTerminal& f = *factored;
    FrozenTerminal t;
    t.value = [g = f.g, s](double y) { return g(y, s); };
    if (f.dx) t.slope = [dx = f.dx, s](double y) { return dx(y, s); };
    t.kinks = kinks;
    if (f.slope_bound) t.slope_bound = f.slope_bound(s);
    return t;
}

FrozenTerminal Scenario::frozen(const DiscreteMeasure& m) const {
    if (factored) return frozen(sigma(m));
    FrozenTerminal t;
    t.value = [G = G, m](double y) { return G(y, m); };
    if (dxG) t.slope = [dxG = dxG, m](double y) { return dxG(y, m); };
    t.kinks = kinks;
    return t;
}

double g_xx(const FactoredTerminal& f, double x, double s) {
    if (f.dxx) return f.dxx(x, s);
    const double h = 1e-5 * (1.0 + std::abs(x));
    return (f.dx(x + h, s) - f.dx(x - h, s)) / (2.0 * h);
}

double g_xs(const FactoredTerminal& f, double x, double s) {
    if (f.dxs) return f.dxs(x, s);
    const double h = 1e-5 * (1.0 + std::abs(s));
    return (f.dx(x, s + h) - f.dx(x, s - h)) / (2.0 * h);
}

namespace {

double sgn(double x) { return (x > 0.0) - (x < 0.0); }

double param(const ParamRecord& p, const char* key, double fallback) {
    auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
}

void reject_unknown(std::string_view name, const ParamRecord& p, std::set<std::string> allowed) {
    for (const auto& [k, v] : p) {
        if (!allowed.count(k)) throw DomainError("scenario " + std::string(name) + " has no parameter '" + k + "'");
        if (!std::isfinite(v)) throw DomainError("parameter '" + k + "' must be finite");
    }
}

// Factored scenario from g and a linear statistic; G and dxG are formed
// directly from the pieces by callers that need an independent route.
Scenario factored_scenario(std::string name, ParamRecord params, FactoredTerminal f) {
    Scenario s;
    s.name = std::move(name);
    s.params = std::move(params);
    s.factored = std::move(f);
    return s;
}

Scenario ll_two_equilibria(const ParamRecord& p) {
    reject_unknown("ll_two_equilibria", p, {"x0", "z", "w", "strict"});
    const double x0 = param(p, "x0", 0.0), z = param(p, "z", 1.0), w = param(p, "w", 1.0);
    const bool strict = param(p, "strict", 0.0) != 0.0;
    if (z < 0.0) throw DomainError("z must be non-negative");
    if (!(w > 0.0)) throw DomainError("w must be positive");
    auto phi = [=](double x) {
        const double r = (std::abs(x - x0) - z) / w;
        return 2.0 - std::exp(-r * r);
    };
    auto dphi = [=](double x) {
        const double r = (std::abs(x - x0) - z) / w;
        return 2.0 * r / w * std::exp(-r * r) * sgn(x - x0);
    };
    auto d2phi = [=](double x) {
        const double r = (std::abs(x - x0) - z) / w;
        return 2.0 / (w * w) * (1.0 - 2.0 * r * r) * std::exp(-r * r);
    };
    if (strict) {
        // Shape needed for two equilibria from delta_{x0}: decreasing on
        // (x0, x0+z), increasing beyond.
        bool ok = z > 0.0 && phi(x0 + z) < phi(x0);
        for (int k = 1; ok && k < 400; ++k) {
            const double u = 4.0 * (z + w) * k / 400.0;
            const double d = dphi(x0 + u);
            if ((u < z && d > 0.0) || (u > z && d < 0.0)) ok = false;
        }
        if (!ok) throw DomainError("phi does not decrease then increase away from x0 (dip hypothesis fails)");
    }
    FactoredTerminal f;
    f.g = [=](double x, double s) { return phi(x) * s; };
    f.dx = [=](double x, double s) { return dphi(x) * s; };
    f.ds = [=](double x, double) { return phi(x); };
    f.dxx = [=](double x, double s) { return d2phi(x) * s; };
    f.dxs = [=](double x, double) { return dphi(x); };
    f.stat = {0.0, phi, dphi, {1.0, 2.0}};
    f.slope_bound = [=](double s) { return std::sqrt(2.0) * std::exp(-0.5) / w * std::abs(s); };
    Scenario s = factored_scenario("ll_two_equilibria", p, f);
    s.G = [=](double x, const DiscreteMeasure& m) { return phi(x) * integrate(m, phi); };
    s.dxG = [=](double x, const DiscreteMeasure& m) { return dphi(x) * integrate(m, phi); };
    if (z > 0.0) s.kinks = {x0};
    s.properties = {{"LL", "holds strongly"}, {"uniqueness", "fails for m0 = delta_x0"}};
    return s;
}

Scenario ll_running_cost(const ParamRecord& p) {
    reject_unknown("ll_running_cost", p, {"T"});
    const double T = param(p, "T", 1.0);
    if (!(T > 0.0)) throw DomainError("T must be positive");
    Scenario s;
    s.name = "ll_running_cost";
    s.params = p;
    s.G = [=](double x, const DiscreteMeasure&) { return -T * std::abs(x); };
    s.dxG = [=](double x, const DiscreteMeasure&) { return -T * sgn(x); };
    s.kinks = {0.0};
    s.running = RunningCoupling{[](double x) { return std::sqrt(2.0 * std::abs(x)); },
                                [](double x) { return sgn(x) / std::sqrt(2.0 * std::abs(x)); }};
    s.properties = {{"LL", "holds strongly (running cost)"}, {"uniqueness", "fails for m0 = delta_0"}};
    return s;
}

Scenario special_unique(const ParamRecord& p) {
    reject_unknown("special_unique", p, {"psi_kind"});
    const int kind = static_cast<int>(param(p, "psi_kind", 0.0));
    if (kind != 0 && kind != 1) throw DomainError("psi_kind must be 0 (identity) or 1 (x^3 + x)");
    auto phi = [](double x) { return x <= 0.0 ? x : (x < 1.0 ? 2.0 * x : x + 1.0); };
    auto dphi = [](double x) { return (x > 0.0 && x < 1.0) ? 2.0 : 1.0; };
    std::function<double(double)> psi = [](double x) { return x; };
    std::function<double(double)> dpsi = [](double) { return 1.0; };
    if (kind == 1) {
        psi = [](double x) { return x * x * x + x; };
        dpsi = [](double x) { return 3.0 * x * x + 1.0; };
    }
    FactoredTerminal f;
    f.g = [=](double x, double s) { return phi(x) * s; };
    f.dx = [=](double x, double s) { return dphi(x) * s; };
    f.ds = [=](double x, double) { return phi(x); };
    f.dxx = [](double, double) { return 0.0; };
    f.dxs = [=](double x, double) { return dphi(x); };
    f.stat = {0.0, psi, dpsi, {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()}};
    f.slope_bound = [](double s) { return 2.0 * std::abs(s); };
    Scenario s = factored_scenario("special_unique", p, f);
    s.G = [=](double x, const DiscreteMeasure& m) { return phi(x) * integrate(m, psi); };
    s.dxG = [=](double x, const DiscreteMeasure& m) { return dphi(x) * integrate(m, psi); };
    s.kinks = {0.0, 1.0};
    s.properties = {{"LL", "fails"}, {"uniqueness", "holds"}};
    return s;
}

Scenario cubic(const ParamRecord& p) {
    reject_unknown("cubic", p, {});
    auto f3 = [](double x) { return x * x * x / 3.0; };
    FactoredTerminal f;
    f.g = [=](double x, double s) { return f3(x) * s; };
    f.dx = [](double x, double s) { return x * x * s; };
    f.ds = [=](double x, double) { return f3(x); };
    f.dxx = [](double x, double s) { return 2.0 * x * s; };
    f.dxs = [](double x, double) { return x * x; };
    f.stat = {0.0, f3, [](double x) { return x * x; },
              {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()}};
    Scenario s = factored_scenario("cubic", p, f);
    s.G = [=](double x, const DiscreteMeasure& m) { return f3(x) * integrate(m, f3); };
    s.dxG = [=](double x, const DiscreteMeasure& m) { return x * x * integrate(m, f3); };
    s.response = ResponseMode::foc_roots;
    s.foc_roots = [](double x, double T, double sig) -> std::vector<double> {
        // y + T sig y^2 = x
        const double k = T * sig;
        if (k == 0.0) return {x};
        const double disc = 1.0 + 4.0 * k * x;
        if (disc < 0.0) return {};
        const double sq = std::sqrt(disc);
        const double near = 2.0 * x / (1.0 + sq);  // root continuous in k at 0
        const double far = (-1.0 - sq) / (2.0 * k);
        if (disc == 0.0) return {near};
        return near < far ? std::vector<double>{near, far} : std::vector<double>{far, near};
    };
    s.properties = {{"LL", "holds"}, {"sigma", "fails"}, {"-sigma", "fails"}, {"L2", "fails"}, {"-L2", "fails"}};
    return s;
}

double disp_phi(double s) {
    if (s >= 1.0) return 1.0 / std::sqrt(s);
    const double u = 1.0 - s;
    return 1.0 + 0.5 * u + 0.375 * u * u;
}

double disp_dphi(double s) {
    if (s >= 1.0) return -0.5 / (s * std::sqrt(s));
    return -0.5 - 0.75 * (1.0 - s);
}

Scenario disp_phi_quadratic(const ParamRecord& p) {
    reject_unknown("disp_phi_quadratic", p, {});
    FactoredTerminal f;
    f.g = [](double x, double s) { return 0.5 * x * x * disp_phi(s); };
    f.dx = [](double x, double s) { return x * disp_phi(s); };
    f.ds = [](double x, double s) { return 0.5 * x * x * disp_dphi(s); };
    f.dxx = [](double, double s) { return disp_phi(s); };
    f.dxs = [](double x, double s) { return x * disp_dphi(s); };
    f.stat = {0.0, [](double x) { return 0.5 * x * x; }, [](double x) { return x; },
              {0.0, std::numeric_limits<double>::infinity()}};
    Scenario s = factored_scenario("disp_phi_quadratic", p, f);
    s.G = [](double x, const DiscreteMeasure& m) { return 0.5 * x * x * disp_phi(0.5 * second_moment(m)); };
    s.dxG = [](double x, const DiscreteMeasure& m) { return x * disp_phi(0.5 * second_moment(m)); };
    s.response = ResponseMode::convex_foc;
    s.properties = {{"D", "holds"}, {"sigma", "fails for large second moment"}, {"L2", "fails for large second moment"}};
    return s;
}

Scenario exp_sin(const ParamRecord& p) {
    reject_unknown("exp_sin", p, {});
    FactoredTerminal f;
    f.g = [](double x, double s) { return std::exp(-x) * s; };
    f.dx = [](double x, double s) { return -std::exp(-x) * s; };
    f.ds = [](double x, double) { return std::exp(-x); };
    f.dxx = [](double x, double s) { return std::exp(-x) * s; };
    f.dxs = [](double x, double) { return -std::exp(-x); };
    f.stat = {2.0, [](double x) { return std::sin(x); }, [](double x) { return std::cos(x); }, {1.0, 3.0}};
    Scenario s = factored_scenario("exp_sin", p, f);
    s.G = [](double x, const DiscreteMeasure& m) {
        return std::exp(-x) * (2.0 + integrate(m, [](double y) { return std::sin(y); }));
    };
    s.dxG = [](double x, const DiscreteMeasure& m) {
        return -std::exp(-x) * (2.0 + integrate(m, [](double y) { return std::sin(y); }));
    };
    s.response = ResponseMode::convex_foc;
    s.properties = {{"X", "holds"}, {"LL", "fails"}, {"D", "fails"}};
    return s;
}

Scenario bounded_moment(const ParamRecord& p) {
    reject_unknown("bounded_moment", p, {"M", "a"});
    const double M = param(p, "M", 1.0), a = param(p, "a", 0.0);
    if (!(M > 0.0)) throw DomainError("M must be positive");
    auto psi = [=](double x) {
        const double u = x / (2.0 * M) - a;
        return 1.0 + u * u;
    };
    auto dpsi = [=](double x) { return (x / (2.0 * M) - a) / M; };
    FactoredTerminal f;
    f.g = [](double x, double s) { return 0.5 * x * x * s; };
    f.dx = [](double x, double s) { return x * s; };
    f.ds = [](double x, double) { return 0.5 * x * x; };
    f.dxx = [](double, double s) { return s; };
    f.dxs = [](double x, double) { return x; };
    f.stat = {0.0, psi, dpsi, {1.0, std::numeric_limits<double>::infinity()}};
    Scenario s = factored_scenario("bounded_moment", p, f);
    s.G = [=](double x, const DiscreteMeasure& m) { return 0.5 * x * x * integrate(m, psi); };
    s.dxG = [=](double x, const DiscreteMeasure& m) { return x * integrate(m, psi); };
    s.moment_bound = M;
    s.response = ResponseMode::convex_foc;
    s.properties = {{"L2", "holds strictly for a = 0"}, {"sigma", "fails for large a"}};
    return s;
}

Scenario linear_in_x(const ParamRecord& p) {
    reject_unknown("linear_in_x", p, {});
    auto psi = [](double x) { return x * x * x + x; };
    auto dpsi = [](double x) { return 3.0 * x * x + 1.0; };
    FactoredTerminal f;
    f.g = [](double x, double s) { return x * s; };
    f.dx = [](double, double s) { return s; };
    f.ds = [](double x, double) { return x; };
    f.dxx = [](double, double) { return 0.0; };
    f.dxs = [](double, double) { return 1.0; };
    f.stat = {0.0, psi, dpsi, {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()}};
    f.slope_bound = [](double s) { return std::abs(s); };
    Scenario s = factored_scenario("linear_in_x", p, f);
    s.G = [=](double x, const DiscreteMeasure& m) { return x * integrate(m, psi); };
    s.dxG = [=](double, const DiscreteMeasure& m) { return integrate(m, psi); };
    s.response = ResponseMode::convex_foc;
    s.properties = {{"sigma", "holds"}, {"LL", "fails"}, {"D", "fails"}, {"L2", "fails"}};
    return s;
}

}  // namespace

std::vector<std::string> catalog_names() {
    return {"ll_two_equilibria", "ll_running_cost", "special_unique", "cubic",
            "disp_phi_quadratic", "exp_sin", "bounded_moment", "linear_in_x"};
}

Scenario catalog(std::string_view name, const ParamRecord& params) {
    if (name == "ll_two_equilibria") return ll_two_equilibria(params);
    if (name == "ll_running_cost") return ll_running_cost(params);
    if (name == "special_unique") return special_unique(params);
    if (name == "cubic") return cubic(params);
    if (name == "disp_phi_quadratic") return disp_phi_quadratic(params);
    if (name == "exp_sin") return exp_sin(params);
    if (name == "bounded_moment") return bounded_moment(params);
    if (name == "linear_in_x") return linear_in_x(params);
    throw DomainError("unknown scenario '" + std::string(name) + "'");
}

FdCheck dxG_fd_check(const Scenario& s, double x, const DiscreteMeasure& m, double h) {
    for (double k : s.kinks) {
        if (std::abs(x - k) <= 2.0 * h) {
            std::ostringstream os;
            os.precision(17);
            os << "refusing to difference G across the kink at x = " << k;
            throw KinkError(os.str());
        }
    }
    if (!s.dxG) throw PreconditionError("scenario " + s.name + " has no analytic dxG");
    FdCheck c{};
    c.analytic = s.dxG(x, m);
    c.numeric = (s.G(x + h, m) - s.G(x - h, m)) / (2.0 * h);
    c.error = std::abs(c.analytic - c.numeric);
    c.tol = 1e-6 * (1.0 + std::abs(c.analytic)) + 1e-9 * (1.0 + std::abs(s.G(x, m))) / h;
    c.pass = c.error <= c.tol;
    return c;
}

TwoEquilibriaHorizon two_equilibria_horizon(const Scenario& s) {
    if (s.name != "ll_two_equilibria") throw PreconditionError("horizon recipe applies to ll_two_equilibria");
    const FactoredTerminal& f = *s.factored;
    const double x0 = s.params.count("x0") ? s.params.at("x0") : 0.0;
    const double z = s.params.count("z") ? s.params.at("z") : 1.0;
    const double w = s.params.count("w") ? s.params.at("w") : 1.0;
    const auto& phi = f.stat.psi;
    const double base = phi(x0);
    MinimizerOptions opts;
    opts.allow_boundary = true;
    for (double tau = 0.125; tau < 1e6; tau *= 2.0) {
        auto obj = [&](double u) { return u * u / (2.0 * tau) + phi(x0 + u); };
        const MinimizerSet half = minimize_on_interval(obj, {0.0, 4.0 * (z + 3.0 * w) + 4.0 * tau}, opts);
        const double u = half.upper();
        if (half.value < base - 1e-6 && u > 1e-3) return {tau, u, tau / phi(x0 + u)};
    }
    throw PreconditionError("no horizon found for which the objective dips below phi(x0)");
}

}  // namespace mfg
