#include "mfg/control.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mfg/kernels.hpp"

namespace mfg {

namespace {

constexpr double kGolden = 0.3819660112501051;  // 2 - phi

struct Candidate {
    double y;
    double v;
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

// Golden-section search on [a, b] seeded with a known point; returns the best
// point evaluated.
template <class F>
Candidate golden(const F& f, double a, double b, Candidate seed) {
    Candidate best = seed;
    double x1 = a + kGolden * (b - a);
    double x2 = b - kGolden * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 200; ++it) {
        if (f1 < best.v) best = {x1, f1};
        if (f2 < best.v) best = {x2, f2};
        if (b - a <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(a) + std::abs(b))) break;
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = a + kGolden * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = b - kGolden * (b - a);
            f2 = f(x2);
        }
    }
    return best;
}

// Bisection for an increasing sign change r(a) < 0 < r(b), to full precision.
template <class R>
double bisect_increasing(const R& r, double a, double b) {
    for (int it = 0; it < 400; ++it) {
        const double m = 0.5 * (a + b);
        if (m <= a || m >= b) break;
        const double rm = r(m);
        if (rm == 0.0) return m;
        if (rm < 0.0) a = m;
        else b = m;
    }
    return 0.5 * (a + b);
}

bool kink_within(const std::vector<double>& kinks, double a, double b) {
    return std::any_of(kinks.begin(), kinks.end(), [&](double k) { return k >= a && k <= b; });
}

bool near_kink(const std::vector<double>& kinks, double y, double tol) {
    return std::any_of(kinks.begin(), kinks.end(), [&](double k) { return std::abs(k - y) <= tol; });
}

std::vector<double> make_grid(Interval b, std::size_t n) {
    std::vector<double> ys(n + 1);
    const double h = b.width() / static_cast<double>(n);
    for (std::size_t i = 0; i <= n; ++i) ys[i] = b.lo + h * static_cast<double>(i);
    ys[n] = b.hi;
    return ys;
}

// Grid indices of discrete local minima, best grid value first.
std::vector<std::size_t> basin_indices(const std::vector<double>& vals, bool allow_boundary, std::size_t cap) {
    const std::size_t n = vals.size() - 1;
    std::vector<std::size_t> idx;
    for (std::size_t i = 1; i < n; ++i) {
        if (vals[i] <= vals[i - 1] && vals[i] <= vals[i + 1]) {
            if (!idx.empty() && idx.back() == i - 1 && vals[i] == vals[i - 1]) continue;  // plateau
            idx.push_back(i);
        }
    }
    if (allow_boundary) {
        if (vals[0] <= vals[1]) idx.push_back(0);
        if (vals[n] <= vals[n - 1]) idx.push_back(n);
    }
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    if (idx.size() > cap) idx.resize(cap);
    return idx;
}

// Keep co-minimal candidates, merge those closer than the separation tolerance.
void collect(std::vector<Candidate> cands, double sep, MinimizerSet& out) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : cands) best = std::min(best, c.v);
    std::vector<Candidate> keep;
    for (const auto& c : cands)
        if (c.v <= best + value_tol(best)) keep.push_back(c);
    std::sort(keep.begin(), keep.end(), [](const Candidate& a, const Candidate& b) { return a.y < b.y; });
    std::vector<Candidate> merged;
    for (const auto& c : keep) {
        if (!merged.empty() && c.y - merged.back().y <= sep) {
            if (c.v < merged.back().v) merged.back() = c;
        } else {
            merged.push_back(c);
        }
    }
    out.argmins.clear();
    out.values.clear();
    for (const auto& c : merged) {
        out.argmins.push_back(c.y);
        out.values.push_back(c.v);
    }
    out.value = best;
}

void check_finite_grid(const std::vector<double>& ys, const std::vector<double>& vals) {
    for (std::size_t i = 0; i < vals.size(); ++i)
        if (std::isnan(vals[i]) || vals[i] == std::numeric_limits<double>::infinity())
            throw DomainError("objective is not finite at y = " + fmt(ys[i]));
        else if (vals[i] == -std::numeric_limits<double>::infinity())
            throw DomainError("objective is unbounded below at y = " + fmt(ys[i]));
}

}  // namespace

Interval default_bracket(double x, double T, const FrozenTerminal& term) {
    double r = 8.0 + std::abs(x);
    if (std::isfinite(term.slope_bound)) r = 1.25 * T * term.slope_bound + 1.0;
    return {x - r, x + r};
}

MinimizerSet minimize_terminal(double x, double T, const FrozenTerminal& term, Interval bracket,
                               const MinimizerOptions& opts) {
    if (!(T > 0.0)) throw DomainError("horizon T must be positive");
    if (!(bracket.hi > bracket.lo)) throw BracketError("empty search bracket");
    if (opts.grid_n < 4) throw DomainError("grid needs at least 4 cells");
    const double inv2t = 0.5 / T;
    auto phi = [&](double y) {
        const double d = x - y;
        return d * d * inv2t + term.value(y);
    };
    for (int widen = 0; widen <= opts.max_widen; ++widen) {
        const std::vector<double> ys = make_grid(bracket, opts.grid_n);
        std::vector<double> tv(ys.size());
        for (std::size_t i = 0; i < ys.size(); ++i) tv[i] = term.value(ys[i]);
        std::vector<double> obj(ys.size());
        const kernels::ArgMin am = kernels::hopf_lax_scan(x, inv2t, ys, tv, obj);
        check_finite_grid(ys, obj);
        const std::size_t n = opts.grid_n;
        const bool touches = am.index == 0 || am.index == n;
        if (touches && !opts.allow_boundary) {
            const double half = bracket.width();
            bracket = {bracket.mid() - half, bracket.mid() + half};
            continue;
        }
        std::vector<Candidate> cands;
        for (std::size_t i : basin_indices(obj, opts.allow_boundary, opts.max_candidates)) {
            const double a = ys[i == 0 ? 0 : i - 1];
            const double b = ys[i == n ? n : i + 1];
            Candidate c = golden(phi, a, b, {ys[i], obj[i]});
            if (term.slope && !kink_within(term.kinks, a, b)) {
                auto r = [&](double y) { return y - x + T * term.slope(y); };
                if (r(a) < 0.0 && r(b) > 0.0) {
                    const double yp = bisect_increasing(r, a, b);
                    const double vp = phi(yp);
                    if (vp <= c.v + 1e-13 * (1.0 + std::abs(c.v))) c = {yp, vp};
                }
            }
            cands.push_back(c);
        }
        MinimizerSet out;
        out.bracket = bracket;
        out.widenings = widen;
        collect(std::move(cands), sep_tol(bracket), out);
        const double h = bracket.width() / static_cast<double>(n);
        const bool edge = out.argmins.front() <= bracket.lo + h || out.argmins.back() >= bracket.hi - h;
        if (edge && !opts.allow_boundary) {
            const double half = bracket.width();
            bracket = {bracket.mid() - half, bracket.mid() + half};
            continue;
        }
        for (double y : out.argmins) {
            if (term.slope && !near_kink(term.kinks, y, 2.0 * h))
                out.foc_residuals.push_back(std::abs(y - x + T * term.slope(y)));
            else
                out.foc_residuals.push_back(std::numeric_limits<double>::quiet_NaN());
        }
        return out;
    }
    throw BracketError("minimizer still touches the search bracket after widening to [" + fmt(bracket.lo) +
                       ", " + fmt(bracket.hi) + "]");
}

MinimizerSet minimize_on_interval(const std::function<double(double)>& f, Interval interval,
                                  const MinimizerOptions& opts) {
    if (!(interval.hi > interval.lo)) throw BracketError("empty interval");
    const std::vector<double> ys = make_grid(interval, opts.grid_n);
    std::vector<double> vals(ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i) vals[i] = f(ys[i]);
    check_finite_grid(ys, vals);
    const std::size_t n = opts.grid_n;
    std::vector<Candidate> cands;
    for (std::size_t i : basin_indices(vals, opts.allow_boundary, opts.max_candidates)) {
        const double a = ys[i == 0 ? 0 : i - 1];
        const double b = ys[i == n ? n : i + 1];
        cands.push_back(golden(f, a, b, {ys[i], vals[i]}));
    }
    if (cands.empty()) {
        // Monotone on the grid with boundary minima excluded.
        throw BracketError("no interior minimum on [" + fmt(interval.lo) + ", " + fmt(interval.hi) + "]");
    }
    MinimizerSet out;
    out.bracket = interval;
    collect(std::move(cands), sep_tol(interval), out);
    out.foc_residuals.assign(out.argmins.size(), std::numeric_limits<double>::quiet_NaN());
    return out;
}

MinimizerSet first_order_roots(double x, double T, const FrozenTerminal& term, Interval bracket, std::size_t grid_n) {
    if (!term.slope) throw PreconditionError("first-order roots need the terminal slope");
    auto r = [&](double y) { return y - x + T * term.slope(y); };
    const std::vector<double> ys = make_grid(bracket, grid_n);
    std::vector<double> rs(ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i) rs[i] = r(ys[i]);
    std::vector<double> roots;
    for (std::size_t i = 0; i < ys.size(); ++i) {
        if (rs[i] == 0.0) roots.push_back(ys[i]);
        if (i + 1 < ys.size() && rs[i] * rs[i + 1] < 0.0) {
            if (rs[i] < 0.0) roots.push_back(bisect_increasing(r, ys[i], ys[i + 1]));
            else roots.push_back(bisect_increasing([&](double y) { return -r(y); }, ys[i], ys[i + 1]));
        }
    }
    MinimizerSet out;
    out.bracket = bracket;
    out.stationary_only = true;
    for (double y : roots) {
        if (!out.argmins.empty() && y - out.argmins.back() <= 1e-12 * (1.0 + std::abs(y))) continue;
        out.argmins.push_back(y);
        const double d = x - y;
        out.values.push_back(term.value ? d * d / (2.0 * T) + term.value(y) : std::numeric_limits<double>::quiet_NaN());
        out.foc_residuals.push_back(std::abs(r(y)));
    }
    if (!out.values.empty()) out.value = *std::min_element(out.values.begin(), out.values.end());
    return out;
}

MinimizerSet convex_first_order(double x, double T, const FrozenTerminal& term) {
    if (!term.slope) throw PreconditionError("first-order solve needs the terminal slope");
    auto r = [&](double y) { return y - x + T * term.slope(y); };
    double step = 1.0;
    double lo = x - step, hi = x + step;
    int guard = 0;
    while (!(r(lo) <= 0.0)) {
        if (++guard > 1100) throw BracketError("first-order condition has no root below x = " + fmt(x));
        step *= 2.0;
        lo = x - step;
    }
    guard = 0;
    step = 1.0;
    while (!(r(hi) >= 0.0)) {
        if (++guard > 1100) throw BracketError("first-order condition has no root above x = " + fmt(x));
        step *= 2.0;
        hi = x + step;
    }
    const double y = r(lo) == 0.0 ? lo : (r(hi) == 0.0 ? hi : bisect_increasing(r, lo, hi));
    MinimizerSet out;
    out.bracket = {lo, hi};
    out.argmins = {y};
    const double d = x - y;
    out.value = d * d / (2.0 * T) + (term.value ? term.value(y) : 0.0);
    out.values = {out.value};
    out.foc_residuals = {std::abs(r(y))};
    return out;
}

BoundsCheck minimizer_bounds_check(double x, double sigma, double T, const MinimizerSet& set) {
    BoundsCheck c{true, std::abs(x) + 2.0 * T * std::abs(sigma), 0.0};
    for (double y : set.argmins) c.worst = std::max(c.worst, std::abs(y));
    c.pass = c.worst <= c.bound * (1.0 + 1e-12) + 1e-12;
    return c;
}

OrderingCheck fg_ordering_check(const std::function<double(double)>& F, const std::function<double(double)>& G,
                                Interval interval, std::size_t grid_n) {
    MinimizerOptions opts;
    opts.grid_n = grid_n;
    opts.allow_boundary = true;
    MinimizerSet sum = minimize_on_interval([&](double y) { return F(y) + G(y); }, interval, opts);
    MinimizerSet base = minimize_on_interval(F, interval, opts);
    const double slack = sep_tol(interval);
    const bool pass = sum.upper() <= base.lower() + slack;
    return {pass, std::move(sum), std::move(base)};
}

namespace {

double sqrt2abs(double x) { return std::sqrt(2.0 * std::abs(x)); }

}  // namespace

ElResidual el_residual(std::span<const double> curve, std::span<const double> population, double T) {
    if (curve.size() != population.size()) throw DimensionError("curve and population grids differ");
    if (curve.size() < 3) throw DomainError("Euler–Lagrange residual needs at least two time steps");
    if (!(T > 0.0)) throw DomainError("horizon T must be positive");
    const std::size_t n = curve.size() - 1;
    const double h = T / static_cast<double>(n);
    ElResidual res{0.0, 0.0, 0};
    for (std::size_t i = 1; i < n; ++i) {
        if (curve[i] == 0.0) throw KinkError("curve crosses the kink of sqrt(2|x|) at time index " + std::to_string(i));
        const double acc = ((curve[i + 1] - curve[i]) - (curve[i] - curve[i - 1])) / (h * h);
        const double drift = (curve[i] > 0.0 ? 1.0 : -1.0) / sqrt2abs(curve[i]) * sqrt2abs(population[i]);
        const double r = std::abs(acc - drift);
        if (r > res.interior) {
            res.interior = r;
            res.worst_index = i;
        }
    }
    if (curve[n] == 0.0) throw KinkError("terminal point sits on the kink of |x|");
    const double vel = (curve[n] - curve[n - 1]) / h;
    res.terminal = std::abs(vel - T * (curve[n] > 0.0 ? 1.0 : -1.0));
    return res;
}

double running_cost_value(std::span<const double> curve, std::span<const double> population, double T) {
    if (curve.size() != population.size() || curve.size() < 2) throw DimensionError("curve and population grids differ");
    const std::size_t n = curve.size() - 1;
    const double h = T / static_cast<double>(n);
    double kinetic = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = (curve[i + 1] - curve[i]) / h;
        kinetic += 0.5 * v * v * h;
    }
    std::vector<double> pot(curve.size());
    for (std::size_t i = 0; i <= n; ++i) pot[i] = sqrt2abs(curve[i]) * sqrt2abs(population[i]);
    return kinetic + kernels::trapezoid(h, pot) - T * std::abs(curve[n]);
}

CoordinateF coordinate_F(double a, const std::function<double(double)>& psi, double radius, std::size_t grid_n) {
    if (!(radius > 0.0)) throw DomainError("radius must be positive");
    MinimizerOptions opts;
    opts.grid_n = grid_n;
    opts.allow_boundary = true;
    auto f = [&](double y) { return a * y + psi(y); };
    const MinimizerSet plus = minimize_on_interval(f, {0.0, radius}, opts);
    const MinimizerSet minus = minimize_on_interval(f, {-radius, 0.0}, opts);
    const double h = radius / static_cast<double>(grid_n);
    if (plus.upper() >= radius - h || minus.lower() <= -radius + h)
        throw BracketError("half-line minimum not attained inside radius " + fmt(radius) + " at a = " + fmt(a));
    return {plus.value, minus.value, plus.value - minus.value, plus.upper(), minus.lower()};
}

double hopf_lax_objective(const std::function<double(double)>& phi, double t, double x, double y) {
    const double d = x - y;
    return d * d / (2.0 * t) + phi(y);
}

ShockSearch find_shock(const std::function<double(double)>& phi, const ShockOptions& opts) {
    if (!(opts.t_start > 0.0) || !(opts.t_growth > 1.0)) throw DomainError("shock search needs t_start > 0 and growth > 1");
    const double R = opts.radius;
    const std::size_t n = opts.grid_n;

    // Preconditions on the box: bounded below with the minimum away from the
    // edges, and growth strictly below quadratic.
    {
        const std::vector<double> ys = make_grid({-R, R}, n);
        std::vector<double> v(ys.size());
        for (std::size_t i = 0; i < ys.size(); ++i) v[i] = phi(ys[i]);
        check_finite_grid(ys, v);
        const auto it = std::min_element(v.begin(), v.end());
        const std::size_t im = static_cast<std::size_t>(it - v.begin());
        if (im == 0 || im == n)
            throw PreconditionError("phi decreases towards the edge of the box; not bounded below on [-" + fmt(R) + ", " + fmt(R) + "]");
        const double vmin = *it;
        for (double edge : {-R, R}) {
            const double g1 = phi(edge) - vmin + 1.0;
            const double g2 = phi(0.5 * edge) - vmin + 1.0;
            const double p = std::log(g1 / g2) / std::log(2.0);
            if (p > 2.05)
                throw PreconditionError("phi grows at least quadratically (estimated exponent " + fmt(p) + ")");
        }
    }

    // Convexity-defect probes phi(x0) - (phi(x0+h) + phi(x0-h))/2.
    struct Probe {
        double x0, h, defect;
    };
    std::vector<Probe> probes;
    double max_defect = -std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 200; ++k) {
        const double x0 = -0.5 * R + R * static_cast<double>(k) / 200.0;
        for (int j = 1; j <= 14; ++j) {
            const double h = 0.5 * R / std::pow(2.0, j - 1);
            const double d = phi(x0) - 0.5 * (phi(x0 + h) + phi(x0 - h));
            probes.push_back({x0, h, d});
            max_defect = std::max(max_defect, d);
        }
    }
    const double defect_floor = 1e-10 * (1.0 + std::abs(phi(0.0)));
    ShockSearch result;
    if (!(max_defect > defect_floor)) {
        result.reason = "phi is convex at probe resolution";
        return result;
    }

    MinimizerOptions mopts;
    mopts.grid_n = n;
    mopts.allow_boundary = true;
    double t = opts.t_start;
    for (int step = 0; step < opts.max_steps; ++step, t *= opts.t_growth) {
        result.steps = step + 1;
        const Probe* best = nullptr;
        double score = defect_floor;
        for (const auto& p : probes) {
            const double s = p.defect - p.h * p.h / (2.0 * t);
            if (s > score) {
                score = s;
                best = &p;
            }
        }
        if (!best) continue;  // psi convex at every probe for this t
        const double x0 = best->x0, h = best->h;
        auto psi = [&](double y) { return y * y / (2.0 * t) + phi(y); };
        const double b = (psi(x0 + h) - psi(x0 - h)) / (2.0 * h);
        const double psi0 = psi(x0);
        auto tilted = [&](double yt) { return psi(yt + x0) - psi0 - b * yt; };
        // Half-line minima in shifted coordinates, both halves inside the box.
        const Interval up{0.0, R - x0}, down{-R - x0, 0.0};
        auto halves = [&](double a, MinimizerSet* p, MinimizerSet* m) {
            auto f = [&](double yt) { return a * yt + tilted(yt); };
            MinimizerSet sp = minimize_on_interval(f, up, mopts);
            MinimizerSet sm = minimize_on_interval(f, down, mopts);
            const double F = sp.value - sm.value;
            if (p) *p = std::move(sp);
            if (m) *m = std::move(sm);
            return F;
        };
        double lo = -1.0, hi = 1.0;
        int guard = 0;
        while (halves(lo, nullptr, nullptr) > 0.0 && ++guard < 60) lo *= 2.0;
        guard = 0;
        while (halves(hi, nullptr, nullptr) < 0.0 && ++guard < 60) hi *= 2.0;
        if (halves(lo, nullptr, nullptr) > 0.0 || halves(hi, nullptr, nullptr) < 0.0) continue;
        for (int it = 0; it < 200; ++it) {
            const double m = 0.5 * (lo + hi);
            if (m <= lo || m >= hi) break;
            const double F = halves(m, nullptr, nullptr);
            if (F == 0.0) {
                lo = hi = m;
                break;
            }
            if (F > 0.0) hi = m;
            else lo = m;
        }
        const double a = 0.5 * (lo + hi);
        MinimizerSet sp, sm;
        halves(a, &sp, &sm);
        const double yl = sm.lower() + x0, yu = sp.upper() + x0;
        const double grid_h = 2.0 * R / static_cast<double>(n);
        if (yl <= -R + grid_h || yu >= R - grid_h) continue;  // minimizers escaped the box
        if (yu - yl <= sep_tol({-R, R})) continue;
        const double x = t * (b - a);
        ShockCertificate cert{t, x, yl, yu, hopf_lax_objective(phi, t, x, yl), hopf_lax_objective(phi, t, x, yu), a, x0, h};
        // Both must be global minimizers of the untilted problem.
        FrozenTerminal term{phi, {}, {}, std::numeric_limits<double>::quiet_NaN()};
        MinimizerOptions gopts;
        gopts.grid_n = n;
        const MinimizerSet global = minimize_terminal(x, t, term, {-R, R}, gopts);
        const double vmin = std::max(cert.value_lower, cert.value_upper);
        if (vmin > global.value + value_tol(global.value)) continue;
        result.certificate = cert;
        return result;
    }
    result.reason = "no shock certified for t up to " + fmt(t / opts.t_growth);
    return result;
}

}  // namespace mfg
