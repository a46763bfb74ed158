#include "mfg/mfgc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mfg/error.hpp"
#include "mfg/kernels.hpp"

namespace mfg::mfgc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Solve f(v) = target for nondecreasing f, to full double precision.
double invert_monotone(const std::function<double(double)>& f, double target) {
    double lo = -1.0, hi = 1.0;
    for (int k = 0; k < 1100 && !(f(lo) <= target); ++k) lo *= 2.0;
    for (int k = 0; k < 1100 && !(f(hi) >= target); ++k) hi *= 2.0;
    if (!(f(lo) <= target && f(hi) >= target)) {
        std::ostringstream os;
        os.precision(17);
        os << "cannot bracket l'(v) = " << target;
        throw BracketError(os.str());
    }
    for (int k = 0; k < 2200; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (f(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

ConvexCost ConvexCost::quadratic() {
    return {"quadratic", [](double v) { return 0.5 * v * v; }, [](double v) { return v; },
            [](double p) { return p; }, [](double p) { return 0.5 * p * p; }};
}

ConvexCost ConvexCost::quartic() {
    return {"quartic", [](double v) { return v * v * v * v; }, [](double v) { return 4.0 * v * v * v; }, {}, {}};
}

ConvexCost ConvexCost::power(double k) {
    if (!(k > 1.0)) throw DomainError("power cost needs exponent > 1");
    ConvexCost c;
    c.name = "power";
    c.ell = [k](double v) { return std::pow(std::abs(v), k); };
    c.dell = [k](double v) { return k * std::copysign(std::pow(std::abs(v), k - 1.0), v); };
    c.dconj = [k](double p) { return std::copysign(std::pow(std::abs(p) / k, 1.0 / (k - 1.0)), p); };
    return c;
}

double ConvexCost::conjugate_derivative(double p) const {
    if (dconj) return dconj(p);
    if (!dell) throw DomainError("cost '" + name + "' has neither l' nor (l*)'");
    return invert_monotone(dell, p);
}

double ConvexCost::conjugate(double p) const {
    if (conj) return conj(p);
    const double v = conjugate_derivative(p);
    return p * v - ell(v);
}

void check_convex(const ConvexCost& c, std::size_t n) {
    const double lo = -10.0, hi = 10.0, h = (hi - lo) / static_cast<double>(n);
    for (std::size_t i = 1; i < n; ++i) {
        const double x = lo + h * static_cast<double>(i);
        const double f0 = c.ell(x);
        const double d2 = c.ell(x + h) - 2.0 * f0 + c.ell(x - h);
        if (!(d2 >= -1e-9 * (1.0 + std::abs(f0)))) {
            std::ostringstream os;
            os.precision(17);
            os << "cost '" << c.name << "' is not convex near v = " << x;
            throw DomainError(os.str());
        }
    }
}

MarketCurve MarketCurve::constant(double T, std::size_t N, std::vector<double> value) {
    MarketCurve m;
    m.T = T;
    m.N = N;
    m.dim = value.size();
    for (std::size_t i = 0; i <= N; ++i) m.values.insert(m.values.end(), value.begin(), value.end());
    m.validate();
    return m;
}

MarketCurve MarketCurve::from_function(double T, std::size_t N, const std::function<double(double)>& f) {
    MarketCurve m;
    m.T = T;
    m.N = N;
    m.dim = 1;
    m.values.resize(N + 1);
    for (std::size_t i = 0; i <= N; ++i) m.values[i] = f(m.t(i));
    m.validate();
    return m;
}

void MarketCurve::validate() const {
    if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("curve horizon must be positive");
    if (N == 0 || dim == 0) throw DomainError("curve needs at least one cell and one component");
    if (values.size() != (N + 1) * dim) throw DimensionError("curve has the wrong number of values");
    for (std::size_t i = 0; i < values.size(); ++i)
        if (!std::isfinite(values[i])) {
            std::ostringstream os;
            os.precision(17);
            os << "curve value at t = " << t(i / dim) << " is not finite";
            throw DomainError(os.str());
        }
}

void Game::validate() const {
    if (c.empty()) throw DimensionError("terminal gradient c is empty");
    if (!a) throw DomainError("coupling a(t) is missing");
    if (!(T > 0.0) || N == 0) throw DomainError("bad time grid");
    for (std::size_t i = 0; i <= N; ++i)
        if (!std::isfinite(a(T * static_cast<double>(i) / static_cast<double>(N))))
            throw DomainError("a(t) is not finite on the grid");
    check_convex(ell);
}

Game constant_a(ConvexCost ell, double a, std::vector<double> c, double T, std::size_t N) {
    Game g;
    g.ell = std::move(ell);
    g.a = [a](double) { return a; };
    g.c = std::move(c);
    g.T = T;
    g.N = N;
    g.validate();
    return g;
}

std::vector<double> dpH(const Game& sc, double t, const std::vector<double>& p, const std::vector<double>& pi) {
    if (p.size() != sc.dim() || pi.size() != sc.dim()) throw DimensionError("dpH arguments do not match the game dimension");
    const double a = sc.a(t);
    std::vector<double> out(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) out[k] = sc.ell.conjugate_derivative(p[k]) - a * pi[k];
    return out;
}

namespace {

void require_grid(const Game& sc, const MarketCurve& pi) {
    pi.validate();
    if (pi.dim != sc.dim()) throw DimensionError("curve dimension does not match the game");
    if (pi.N != sc.N || pi.T != sc.T) throw DimensionError("curve grid does not match the game grid");
}

void require_common(const MarketCurve& a, const MarketCurve& b) {
    if (a.N != b.N || a.T != b.T || a.dim != b.dim) throw DimensionError("curves live on different grids");
}

}  // namespace

MarketCurve market_map(const Game& sc, const MarketCurve& pi) {
    require_grid(sc, pi);
    const std::size_t d = sc.dim();
    std::vector<double> p(d);
    for (std::size_t k = 0; k < d; ++k) p[k] = -sc.c[k];
    // (l*)'(-c) does not change along the curve.
    std::vector<double> base(d);
    for (std::size_t k = 0; k < d; ++k) base[k] = sc.ell.conjugate_derivative(p[k]);
    MarketCurve out = pi;
    for (std::size_t i = 0; i < pi.points(); ++i) {
        const double a = sc.a(pi.t(i));
        for (std::size_t k = 0; k < d; ++k) {
            // integrating a z-independent velocity against m0 returns it unchanged
            out.values[i * d + k] = base[k] - a * pi.at(i, k);
        }
    }
    return out;
}

double fixed_point_residual(const Game& sc, const MarketCurve& pi) {
    const MarketCurve img = market_map(sc, pi);
    double r = 0.0;
    for (std::size_t j = 0; j < pi.values.size(); ++j) r = std::max(r, std::abs(pi.values[j] - img.values[j]));
    return r;
}

std::string status_name(FixedPointReport::Status s) {
    switch (s) {
        case FixedPointReport::Status::converged: return "converged";
        case FixedPointReport::Status::diverged: return "diverged";
        case FixedPointReport::Status::max_iterations: return "max_iterations";
    }
    return "?";
}

namespace {

FixedPointReport picard(const Game& sc, const MarketCurve& start, double lambda, const FixedPointOptions& opts) {
    if (!(lambda > 0.0 && lambda <= 1.0)) throw DomainError("damping must lie in (0, 1]");
    FixedPointReport rep{FixedPointReport::Status::max_iterations, start, 0, kInf, {}};
    MarketCurve cur = start;
    for (int it = 0; it <= opts.max_iter; ++it) {
        const MarketCurve img = market_map(sc, cur);
        double r = 0.0, norm = 0.0;
        for (std::size_t j = 0; j < cur.values.size(); ++j) {
            r = std::max(r, std::abs(cur.values[j] - img.values[j]));
            norm = std::max(norm, std::abs(cur.values[j]));
        }
        rep.trace.push_back(r);
        rep.iterations = it;
        rep.residual = r;
        if (r < opts.tol) {
            rep.status = FixedPointReport::Status::converged;
            rep.curve = cur;
            return rep;
        }
        if (norm > opts.blowup) {
            rep.status = FixedPointReport::Status::diverged;
            rep.curve = cur;
            return rep;
        }
        if (it == opts.max_iter) break;
        for (std::size_t j = 0; j < cur.values.size(); ++j)
            cur.values[j] = (1.0 - lambda) * cur.values[j] + lambda * img.values[j];
        for (double v : cur.values)
            if (!std::isfinite(v)) {
                rep.status = FixedPointReport::Status::diverged;
                rep.curve = cur;
                rep.iterations = it + 1;
                return rep;
            }
    }
    rep.curve = cur;
    return rep;
}

FixedPointReport monotone_root(const Game& sc, const MarketCurve& start) {
    if (sc.dim() != 1) throw DimensionError("monotone root finding is implemented for d = 1");
    MarketCurve cur = start;
    const double p = -sc.c[0];
    for (std::size_t i = 0; i < cur.points(); ++i) {
        const double t = cur.t(i);
        auto r = [&](double x) { return x - dpH(sc, t, {p}, {x})[0]; };
        const double x0 = cur.at(i);
        double lo = x0 - 1.0, hi = x0 + 1.0;
        int k = 0;
        for (; k < 60 && r(lo) * r(hi) > 0.0; ++k) {
            lo = x0 - 4.0 * (x0 - lo);
            hi = x0 + 4.0 * (hi - x0);
        }
        // strict monotonicity on the bracket, sampled
        constexpr int kChecks = 33;
        double prev = r(lo), dir = 0.0;
        for (int j = 1; j <= kChecks; ++j) {
            const double x = lo + (hi - lo) * j / kChecks;
            const double v = r(x);
            const double step = v - prev;
            if (step == 0.0 || (dir != 0.0 && step * dir < 0.0)) {
                std::ostringstream os;
                os.precision(17);
                os << "pi - Pi(pi) is not strictly monotone in pi at t = " << t << " (a(t) = " << sc.a(t) << ")";
                throw PreconditionError(os.str());
            }
            dir = step;
            prev = v;
        }
        if (r(lo) * r(hi) > 0.0) throw BracketError("no sign change of pi - Pi(pi)");
        const bool increasing = dir > 0.0;
        for (int j = 0; j < 2200; ++j) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            const double v = r(mid);
            if (v == 0.0) {
                lo = hi = mid;
                break;
            }
            ((v < 0.0) == increasing ? lo : hi) = mid;
        }
        cur.values[i] = 0.5 * (lo + hi);
    }
    FixedPointReport rep{FixedPointReport::Status::converged, cur, 1, fixed_point_residual(sc, cur), {}};
    rep.trace.push_back(rep.residual);
    return rep;
}

}  // namespace

FixedPointReport market_fixed_point(const Game& sc, const MarketCurve& start, FixedPointMethod method,
                                    const FixedPointOptions& opts) {
    require_grid(sc, start);
    if (method.kind == FixedPointMethod::Kind::picard) return picard(sc, start, method.lambda, opts);
    return monotone_root(sc, start);
}

double pi_monotonicity_gap(const Game& sc, double t, const std::vector<double>& p, const std::vector<double>& pi1,
                           const std::vector<double>& pi2) {
    const auto d1 = dpH(sc, t, p, pi1), d2 = dpH(sc, t, p, pi2);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double dp = pi1[k] - pi2[k];
        lhs += (d1[k] - d2[k]) * dp;
        rhs += dp * dp;
    }
    return lhs - rhs;
}

double sigma_condition_h1(const Game& sc, const MarketCurve& pi1, const MarketCurve& pi2) {
    require_common(pi1, pi2);
    const MarketCurve a = market_map(sc, pi1), b = market_map(sc, pi2);
    const std::size_t d = pi1.dim;
    std::vector<double> f(pi1.points());
    for (std::size_t i = 0; i < f.size(); ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            const std::size_t j = i * d + k;
            s += (a.values[j] - pi1.values[j] - (b.values[j] - pi2.values[j])) * (pi1.values[j] - pi2.values[j]);
        }
        f[i] = s;
    }
    return kernels::trapezoid(pi1.h(), f);
}

double ll_mfgc_expression(const std::function<double(double)>& ell, double a, const DiscreteMeasure& mu1,
                          const DiscreteMeasure& mu2) {
    if (mu1.dim() != 1 || mu2.dim() != 1) throw DimensionError("the MFGC expression is implemented for d = 1");
    const double s1 = a * mean(mu1)[0], s2 = a * mean(mu2)[0];
    auto f = [&](double v) { return ell(v + s1) - ell(v + s2); };
    return integrate(mu1, f) - integrate(mu2, f);
}

DiscreteMeasure quartic_family(double b, double x) {
    if (!(b > 0.0 && b < 1.0)) throw DomainError("b must lie in (0, 1)");
    return DiscreteMeasure({x, (1.0 - b * x) / (1.0 - b)}, {b, 1.0 - b});
}

}  // namespace mfg::mfgc
