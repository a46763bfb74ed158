#include "mfg/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mfg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

void require_terminal_game(const Scenario& s) {
    if (s.running) throw PreconditionError("scenario " + s.name + " couples through the running cost; terminal best responses do not apply");
    if (s.dim != 1) throw DimensionError("best responses are implemented for one-dimensional scenarios");
}

const FactoredTerminal& require_factored(const Scenario& s) {
    require_terminal_game(s);
    if (!s.factored) throw PreconditionError("scenario " + s.name + " has no scalar parameter statistic");
    return *s.factored;
}

ResponseMode mode_of(const Scenario& s, const ResponseOptions& o) { return o.mode.value_or(s.response); }

MinimizerSet from_roots(double x, double T, const FrozenTerminal& term, std::vector<double> roots) {
    MinimizerSet out;
    out.stationary_only = true;
    out.argmins = std::move(roots);
    for (double y : out.argmins) {
        const double d = x - y;
        out.values.push_back(d * d / (2.0 * T) + term.value(y));
        out.foc_residuals.push_back(term.slope ? std::abs(y - x + T * term.slope(y)) : kNaN);
    }
    if (!out.values.empty()) out.value = *std::min_element(out.values.begin(), out.values.end());
    if (!out.argmins.empty()) out.bracket = {out.argmins.front(), out.argmins.back()};
    return out;
}

// Indices of atoms with several optimal destinations, and the subset branched over.
struct MultiAtoms {
    std::vector<std::size_t> branched;
    bool truncated = false;
    std::size_t count = 0;
};

MultiAtoms multi_atoms(const std::vector<MinimizerSet>& sets, std::size_t cap) {
    MultiAtoms m;
    for (std::size_t i = 0; i < sets.size(); ++i) {
        if (sets[i].argmins.size() > 1) {
            ++m.count;
            if (m.branched.size() < cap) m.branched.push_back(i);
            else m.truncated = true;
        }
    }
    return m;
}

// Pure selections: every branched atom chooses its lowest or highest
// destination, all other atoms their lowest.
std::vector<std::vector<std::size_t>> pick_patterns(const std::vector<MinimizerSet>& sets, const MultiAtoms& multi) {
    std::vector<std::vector<std::size_t>> out;
    const std::size_t k = multi.branched.size();
    for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
        std::vector<std::size_t> picks(sets.size(), 0);
        for (std::size_t b = 0; b < k; ++b)
            if (mask & (std::size_t{1} << b)) picks[multi.branched[b]] = sets[multi.branched[b]].argmins.size() - 1;
        out.push_back(std::move(picks));
    }
    return out;
}

DiscreteMeasure measure_of(const DiscreteMeasure& m0, const std::vector<MinimizerSet>& sets,
                           const std::vector<std::size_t>& picks) {
    std::vector<double> atoms(m0.size());
    for (std::size_t i = 0; i < m0.size(); ++i) atoms[i] = sets[i].argmins[picks[i]];
    return DiscreteMeasure(std::move(atoms), m0.weights(), 1);
}

// Atom j split between its lowest (1-c) and highest (c) destinations.
DiscreteMeasure split_measure(const DiscreteMeasure& m0, const std::vector<MinimizerSet>& sets,
                              const std::vector<std::size_t>& picks, std::size_t j, double c) {
    std::vector<double> atoms, w;
    for (std::size_t i = 0; i < m0.size(); ++i) {
        if (i == j) {
            atoms.push_back(sets[i].lower());
            w.push_back((1.0 - c) * m0.weight(i));
            atoms.push_back(sets[i].upper());
            w.push_back(c * m0.weight(i));
        } else {
            atoms.push_back(sets[i].argmins[picks[i]]);
            w.push_back(m0.weight(i));
        }
    }
    return DiscreteMeasure(std::move(atoms), std::move(w), 1);
}

std::string pick_label(const std::vector<MinimizerSet>& sets, const std::vector<std::size_t>& picks) {
    bool all_low = true, all_high = true, any_multi = false;
    std::string bits;
    for (std::size_t i = 0; i < sets.size(); ++i) {
        if (sets[i].argmins.size() < 2) continue;
        any_multi = true;
        const bool high = picks[i] == sets[i].argmins.size() - 1;
        all_low = all_low && !high;
        all_high = all_high && high;
        bits += high ? '1' : '0';
    }
    if (!any_multi) return "unique";
    if (all_low) return "lower";
    if (all_high) return "upper";
    return "branch:" + bits;
}

}  // namespace

MinimizerSet respond(const Scenario& s, double x, double T, const FrozenTerminal& term, double sigma,
                     const ResponseOptions& opts) {
    require_terminal_game(s);
    if (!(T > 0.0)) throw DomainError("horizon T must be positive");
    switch (mode_of(s, opts)) {
        case ResponseMode::global_grid:
            return minimize_terminal(x, T, term, default_bracket(x, T, term), opts.minimizer);
        case ResponseMode::convex_foc:
            return convex_first_order(x, T, term);
        case ResponseMode::foc_roots: {
            MinimizerSet set;
            if (s.foc_roots && !std::isnan(sigma)) {
                set = from_roots(x, T, term, s.foc_roots(x, T, sigma));
            } else {
                Interval b = default_bracket(x, T, term);
                const double r = std::max(b.width(), 1e3);
                set = first_order_roots(x, T, term, {x - r, x + r}, opts.minimizer.grid_n);
            }
            if (set.argmins.empty()) throw DomainError("no first-order best response for an agent at x = " + fmt(x));
            return set;
        }
    }
    throw PreconditionError("unknown response mode");
}

ParameterResponse parameter_response(const Scenario& s, const DiscreteMeasure& m0, double T, double sigma,
                                     const ResponseOptions& opts) {
    const FactoredTerminal& f = require_factored(s);
    if (m0.dim() != 1) throw DimensionError("initial measure must be one-dimensional");
    const FrozenTerminal term = s.frozen(sigma);
    ParameterResponse pr;
    pr.sigma = sigma;
    double lo = f.stat.offset, hi = f.stat.offset;
    for (std::size_t i = 0; i < m0.size(); ++i) {
        pr.per_atom.push_back(respond(s, m0.x(i), T, term, sigma, opts));
        double pmin = kInf, pmax = -kInf;
        for (double y : pr.per_atom.back().argmins) {
            const double p = f.stat.psi(y);
            pmin = std::min(pmin, p);
            pmax = std::max(pmax, p);
        }
        lo += m0.weight(i) * pmin;
        hi += m0.weight(i) * pmax;
    }
    pr.hull = {lo, hi};
    const MultiAtoms multi = multi_atoms(pr.per_atom, opts.max_branch_atoms);
    pr.multi_atoms = multi.count;
    pr.truncated = multi.truncated;
    pr.is_interval = mode_of(s, opts) != ResponseMode::foc_roots && multi.count <= 1;
    for (auto& picks : pick_patterns(pr.per_atom, multi)) {
        DiscreteMeasure m = measure_of(m0, pr.per_atom, picks);
        const double tau = f.stat(m);
        pr.branches.push_back({std::move(picks), std::move(m), tau});
    }
    return pr;
}

std::vector<DiscreteMeasure> terminal_best_response(const Scenario& s, const DiscreteMeasure& m0, double T,
                                                    const DiscreteMeasure& m, SelectionPolicy policy,
                                                    const ResponseOptions& opts) {
    require_terminal_game(s);
    if (m0.dim() != 1) throw DimensionError("initial measure must be one-dimensional");
    const double sigma = s.factored ? s.sigma(m) : kNaN;
    const FrozenTerminal term = s.frozen(m);
    std::vector<MinimizerSet> sets;
    for (std::size_t i = 0; i < m0.size(); ++i) sets.push_back(respond(s, m0.x(i), T, term, sigma, opts));
    std::vector<std::size_t> picks(sets.size(), 0);
    switch (policy.kind) {
        case SelectionPolicy::Kind::lower:
            return {measure_of(m0, sets, picks)};
        case SelectionPolicy::Kind::upper:
            for (std::size_t i = 0; i < sets.size(); ++i) picks[i] = sets[i].argmins.size() - 1;
            return {measure_of(m0, sets, picks)};
        case SelectionPolicy::Kind::split: {
            if (!(policy.c >= 0.0 && policy.c <= 1.0)) throw DomainError("split fraction outside [0,1]");
            std::vector<double> atoms, w;
            for (std::size_t i = 0; i < sets.size(); ++i) {
                if (sets[i].argmins.size() > 1) {
                    atoms.push_back(sets[i].lower());
                    w.push_back((1.0 - policy.c) * m0.weight(i));
                    atoms.push_back(sets[i].upper());
                    w.push_back(policy.c * m0.weight(i));
                } else {
                    atoms.push_back(sets[i].lower());
                    w.push_back(m0.weight(i));
                }
            }
            return {DiscreteMeasure(std::move(atoms), std::move(w), 1)};
        }
        case SelectionPolicy::Kind::enumerate: {
            std::vector<DiscreteMeasure> out;
            for (const auto& p : pick_patterns(sets, multi_atoms(sets, opts.max_branch_atoms)))
                out.push_back(measure_of(m0, sets, p));
            return out;
        }
    }
    throw PreconditionError("unknown selection policy");
}

std::vector<RandomVariable> lifted_best_response(const Scenario& s, const RandomVariable& x0, double T,
                                                 const RandomVariable& x, SelectionPolicy policy,
                                                 const ResponseOptions& opts) {
    require_terminal_game(s);
    require_same_space(x0, x);
    if (x0.dim() != 1 || x.dim() != 1) throw DimensionError("lifted responses are implemented for d = 1");
    if (policy.kind == SelectionPolicy::Kind::split)
        throw PreconditionError("mass splitting has no random-variable representation on a fixed sample space");
    const DiscreteMeasure lx = law(x);
    const double sigma = s.factored ? s.sigma(lx) : kNaN;
    const FrozenTerminal term = s.frozen(lx);
    std::vector<MinimizerSet> sets;
    for (std::size_t w = 0; w < x0.size(); ++w) sets.push_back(respond(s, x0.value(w), T, term, sigma, opts));
    auto realize = [&](const std::vector<std::size_t>& picks) {
        std::vector<double> v(sets.size());
        for (std::size_t w = 0; w < sets.size(); ++w) v[w] = sets[w].argmins[picks[w]];
        return RandomVariable(x0.space(), std::move(v), 1);
    };
    std::vector<std::size_t> picks(sets.size(), 0);
    switch (policy.kind) {
        case SelectionPolicy::Kind::lower:
            return {realize(picks)};
        case SelectionPolicy::Kind::upper:
            for (std::size_t w = 0; w < sets.size(); ++w) picks[w] = sets[w].argmins.size() - 1;
            return {realize(picks)};
        case SelectionPolicy::Kind::enumerate: {
            std::vector<RandomVariable> out;
            for (const auto& p : pick_patterns(sets, multi_atoms(sets, opts.max_branch_atoms))) out.push_back(realize(p));
            return out;
        }
        default:
            break;
    }
    throw PreconditionError("unknown selection policy");
}

SigmaFixedPoint fixed_point_bisection(const std::function<Interval(double)>& map, const BisectionOptions& opts) {
    Interval br = opts.bracket;
    if (!(br.hi > br.lo)) throw BracketError("empty sigma bracket");
    bool contains = false;
    for (int w = 0; w <= opts.max_widen; ++w) {
        const Interval el = map(br.lo), eh = map(br.hi);
        if (br.lo - el.hi <= 0.0 && br.hi - eh.lo >= 0.0) {
            contains = true;
            break;
        }
        if (w == opts.max_widen) break;
        const double half = 0.5 * br.width() * opts.widen_factor;
        br = {br.mid() - half, br.mid() + half};
    }
    if (!contains)
        throw BracketError("sigma - E(sigma) does not change sign on [" + fmt(br.lo) + ", " + fmt(br.hi) + "]");
    if (opts.spot_checks >= 2) {
        Interval prev = map(br.lo);
        double sprev = br.lo;
        for (int k = 1; k < opts.spot_checks; ++k) {
            const double sk = br.lo + br.width() * k / (opts.spot_checks - 1);
            const Interval cur = map(sk);
            const double tol = 1e-9 * (1.0 + std::abs(prev.hi) + std::abs(cur.hi));
            if (cur.hi > prev.hi + tol || cur.lo > prev.lo + tol)
                throw PreconditionError("best-response map increases between sigma = " + fmt(sprev) + " and " + fmt(sk) +
                                        "; bisection needs a nonincreasing map");
            prev = cur;
            sprev = sk;
        }
    }
    double a = br.lo, b = br.hi;
    int it = 0;
    for (; it < 2000; ++it) {
        if (b - a <= opts.tol) break;
        const double m = 0.5 * (a + b);
        if (m <= a || m >= b) break;
        const Interval e = map(m);
        if (m - e.lo < 0.0) a = m;
        else if (m - e.hi > 0.0) b = m;
        else {
            a = b = m;
            break;
        }
    }
    const double sigma = 0.5 * (a + b);
    return {sigma, map(sigma), {a, b}, it};
}

namespace {

Interval default_sigma_bracket(const FactoredTerminal& f) {
    Interval br{-1e3, 1e3};
    br.lo = std::max(br.lo, f.stat.range.lo);
    br.hi = std::min(br.hi, f.stat.range.hi);
    if (!(br.hi > br.lo)) throw BracketError("statistic range leaves no bracket");
    return br;
}

}  // namespace

SigmaFixedPoint fixed_point_bisection(const Scenario& s, const DiscreteMeasure& m0, double T, BisectionOptions opts,
                                      const ResponseOptions& ropts) {
    const FactoredTerminal& f = require_factored(s);
    const Interval def{-1e3, 1e3};
    if (opts.bracket.lo == def.lo && opts.bracket.hi == def.hi) opts.bracket = default_sigma_bracket(f);
    return fixed_point_bisection([&](double sg) { return parameter_response(s, m0, T, sg, ropts).hull; }, opts);
}

PicardReport fixed_point_picard(const std::function<double(double)>& map, double start, double lambda, int max_iter,
                                double tol, double blowup) {
    if (!(lambda > 0.0 && lambda <= 1.0)) throw DomainError("damping lambda must lie in (0, 1]");
    PicardReport rep{PicardReport::Status::max_iterations, start, 0, {start}};
    double s = start;
    for (int k = 1; k <= max_iter; ++k) {
        const double next = (1.0 - lambda) * s + lambda * map(s);
        rep.trace.push_back(next);
        rep.iterations = k;
        if (std::isnan(next)) {
            std::ostringstream os;
            os.precision(17);
            os << "fixed-point iterate became NaN at step " << k << "; last finite iterate " << s;
            throw NumericalError(os.str());
        }
        if (!std::isfinite(next) || std::abs(next) > blowup) {
            rep.status = PicardReport::Status::diverged;
            rep.sigma = next;
            return rep;
        }
        const double step = std::abs(next - s);
        s = next;
        if (step <= tol * (1.0 + std::abs(s))) {
            rep.status = PicardReport::Status::converged;
            rep.sigma = s;
            return rep;
        }
    }
    rep.sigma = s;
    return rep;
}

std::string multiplicity_name(Multiplicity m) {
    switch (m) {
        case Multiplicity::unique_certified: return "unique-certified";
        case Multiplicity::one_of_several: return "one-of-several";
        case Multiplicity::unknown: return "unknown";
    }
    return "unknown";
}

namespace {

// Residual sigma - E(sigma) as an interval, or per-curve scalars for branch sets.
struct ScanPoint {
    bool defined = false;
    double sigma = 0.0;
    double rmin = 0.0, rmax = 0.0;  // hull residual bounds
    double r_low = 0.0, r_high = 0.0;  // all-lower / all-upper branch residuals
};

ScanPoint scan_point(const Scenario& s, const DiscreteMeasure& m0, double T, double sigma, const ResponseOptions& o) {
    ScanPoint p;
    p.sigma = sigma;
    try {
        const ParameterResponse pr = parameter_response(s, m0, T, sigma, o);
        p.rmin = sigma - pr.hull.hi;
        p.rmax = sigma - pr.hull.lo;
        p.r_low = sigma - pr.branches.front().tau;
        // Highest destination everywhere.
        std::vector<std::size_t> picks(pr.per_atom.size());
        for (std::size_t i = 0; i < picks.size(); ++i) picks[i] = pr.per_atom[i].argmins.size() - 1;
        p.r_high = sigma - s.factored->stat(measure_of(m0, pr.per_atom, picks));
        p.defined = true;
    } catch (const Error&) {
        p.defined = false;
    }
    return p;
}

// Interval-residual bisection; increasing = the residual crosses from
// negative to positive.
std::optional<double> bisect_interval(const Scenario& s, const DiscreteMeasure& m0, double T, const ResponseOptions& o,
                                      double a, double b, bool increasing) {
    for (int it = 0; it < 400; ++it) {
        const double m = 0.5 * (a + b);
        if (m <= a || m >= b) break;
        const ScanPoint p = scan_point(s, m0, T, m, o);
        if (!p.defined) return std::nullopt;
        const bool left = increasing ? p.rmax < 0.0 : p.rmin > 0.0;
        const bool right = increasing ? p.rmin > 0.0 : p.rmax < 0.0;
        if (left) a = m;
        else if (right) b = m;
        else return m;
    }
    return 0.5 * (a + b);
}

std::optional<double> bisect_curve(const Scenario& s, const DiscreteMeasure& m0, double T, const ResponseOptions& o,
                                   double a, double b, bool high, double ra) {
    for (int it = 0; it < 400; ++it) {
        const double m = 0.5 * (a + b);
        if (m <= a || m >= b) break;
        const ScanPoint p = scan_point(s, m0, T, m, o);
        if (!p.defined) return std::nullopt;
        const double rm = high ? p.r_high : p.r_low;
        if (rm == 0.0) return m;
        if ((rm < 0.0) == (ra < 0.0)) {
            a = m;
            ra = rm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

double refined_certificate(const Scenario& s, const DiscreteMeasure& m0, double T, const EquilibriumResult& r,
                           const ResponseOptions& o, std::vector<double>& atom_values) {
    const FrozenTerminal term = s.frozen(r.sigma);
    ResponseOptions fine = o;
    fine.mode = ResponseMode::global_grid;
    fine.minimizer.grid_n = 2 * o.minimizer.grid_n;
    const bool certify = mode_of(s, o) != ResponseMode::foc_roots;
    std::vector<double> mins(m0.size(), kNaN);
    if (certify)
        for (std::size_t i = 0; i < m0.size(); ++i) mins[i] = respond(s, m0.x(i), T, term, r.sigma, fine).value;
    double worst = certify ? 0.0 : kNaN;
    atom_values.assign(m0.size(), -kInf);
    for (std::size_t k = 0; k < r.measure.size(); ++k) {
        const std::size_t i = r.sources[k];
        const double d = m0.x(i) - r.measure.x(k);
        const double val = d * d / (2.0 * T) + term.value(r.measure.x(k));
        atom_values[i] = std::max(atom_values[i], val);
        if (certify) worst = std::max(worst, val - mins[i]);
    }
    return worst;
}

std::vector<std::size_t> identity_sources(std::size_t n) {
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = i;
    return v;
}

std::vector<std::size_t> split_sources(std::size_t n, std::size_t j) {
    std::vector<std::size_t> v;
    for (std::size_t i = 0; i < n; ++i) {
        v.push_back(i);
        if (i == j) v.push_back(i);
    }
    return v;
}

// At a splitting atom the co-minimality tolerance accepts a window of sigma
// around the true tie. Solve V_upper(sigma) = V_lower(sigma) for the atom's
// two basins, split at the midpoint between its minimizers.
std::optional<double> refine_tie(const Scenario& s, const DiscreteMeasure& m0, double T, const ResponseOptions& ro,
                                 double sg, const MinimizerSet& set, std::size_t atom) {
    const double x = m0.x(atom);
    const double split = 0.5 * (set.lower() + set.upper());
    const Interval left{set.bracket.lo, split}, right{split, set.bracket.hi};
    MinimizerOptions mo = ro.minimizer;
    mo.allow_boundary = true;
    auto gap = [&](double sig) {
        const FrozenTerminal term = s.frozen(sig);
        auto obj = [&](double y) { return (x - y) * (x - y) / (2.0 * T) + term.value(y); };
        return minimize_on_interval(obj, right, mo).value - minimize_on_interval(obj, left, mo).value;
    };
    const double h = 1e-6 * (1.0 + std::abs(sg));
    double lo = sg - h, hi = sg + h;
    double glo = gap(lo), ghi = gap(hi);
    if (!(glo * ghi < 0.0)) return std::nullopt;
    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double g = gap(mid);
        if (g == 0.0) return mid;
        if ((g < 0.0) == (glo < 0.0)) {
            lo = mid;
            glo = g;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

EquilibriumSet enumerate_equilibria(const Scenario& s, const DiscreteMeasure& m0, double T, const EnumerateOptions& opts) {
    const FactoredTerminal& f = require_factored(s);
    const ResponseOptions& ro = opts.response;
    const bool branch_mode = mode_of(s, ro) == ResponseMode::foc_roots;
    const Interval br = opts.bracket.value_or(default_sigma_bracket(f));
    const std::size_t n = std::max<std::size_t>(opts.scan_points, 3);

    EquilibriumSet out;
    std::vector<ScanPoint> pts(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double sg = i + 1 == n ? br.hi : br.lo + br.width() * static_cast<double>(i) / static_cast<double>(n - 1);
        pts[i] = scan_point(s, m0, T, sg, ro);
        if (!pts[i].defined) ++out.undefined_points;
    }
    out.scan_monotone = out.undefined_points == 0;
    for (std::size_t i = 0; i + 1 < n && out.scan_monotone; ++i) {
        const double tol = 1e-9 * (1.0 + std::abs(pts[i].sigma));
        if (pts[i + 1].rmin < pts[i].rmin - tol || pts[i + 1].rmax < pts[i].rmax - tol) out.scan_monotone = false;
        if (branch_mode) out.scan_monotone = false;
    }

    std::vector<double> cands;
    for (std::size_t i = 0; i < n; ++i) {
        const ScanPoint& p = pts[i];
        if (!p.defined) continue;
        if (!branch_mode && p.rmin <= 0.0 && p.rmax >= 0.0) cands.push_back(p.sigma);
        if (branch_mode && (p.r_low == 0.0 || p.r_high == 0.0)) cands.push_back(p.sigma);
        if (i + 1 == n || !pts[i + 1].defined) continue;
        const ScanPoint& q = pts[i + 1];
        if (!branch_mode) {
            if (p.rmax < 0.0 && q.rmin > 0.0)
                if (auto r = bisect_interval(s, m0, T, ro, p.sigma, q.sigma, true)) cands.push_back(*r);
            if (p.rmin > 0.0 && q.rmax < 0.0)
                if (auto r = bisect_interval(s, m0, T, ro, p.sigma, q.sigma, false)) cands.push_back(*r);
        } else {
            if (p.r_low * q.r_low < 0.0)
                if (auto r = bisect_curve(s, m0, T, ro, p.sigma, q.sigma, false, p.r_low)) cands.push_back(*r);
            if (p.r_high * q.r_high < 0.0)
                if (auto r = bisect_curve(s, m0, T, ro, p.sigma, q.sigma, true, p.r_high)) cands.push_back(*r);
        }
    }
    std::sort(cands.begin(), cands.end());
    std::vector<double> uniq;
    for (double c : cands)
        if (uniq.empty() || c - uniq.back() > 1e-9 * (1.0 + std::abs(c))) uniq.push_back(c);
    out.crossings = uniq.size();

    std::vector<EquilibriumResult> found;
    for (double sg : uniq) {
        ParameterResponse pr;
        try {
            pr = parameter_response(s, m0, T, sg, ro);
        } catch (const Error&) {
            continue;
        }
        MultiAtoms multi = multi_atoms(pr.per_atom, ro.max_branch_atoms);
        if (!branch_mode && multi.branched.size() == 1) {
            const std::size_t j = multi.branched.front();
            const double pl = f.stat.psi(pr.per_atom[j].lower()), ph = f.stat.psi(pr.per_atom[j].upper());
            const bool interior = pr.hull.lo < sg && sg < pr.hull.hi;
            if (interior && std::abs(ph - pl) > 1e-12 * (1.0 + std::abs(pl))) {
                try {
                    if (auto t = refine_tie(s, m0, T, ro, sg, pr.per_atom[j], j)) {
                        ParameterResponse again = parameter_response(s, m0, T, *t, ro);
                        const MultiAtoms m2 = multi_atoms(again.per_atom, ro.max_branch_atoms);
                        if (m2.branched.size() == 1 && m2.branched.front() == j) {
                            sg = *t;
                            pr = std::move(again);
                            multi = m2;
                        }
                    }
                } catch (const Error&) {
                    // keep the bisection estimate
                }
            }
        }
        const double ctol = opts.consistency_tol * (1.0 + std::abs(sg));
        // Atoms whose co-optimal destinations carry the same statistic admit
        // every mixture.
        bool mixtures = false;
        for (std::size_t j : multi.branched) {
            const double pl = f.stat.psi(pr.per_atom[j].lower()), ph = f.stat.psi(pr.per_atom[j].upper());
            if (std::abs(ph - pl) <= 1e-12 * (1.0 + std::abs(pl))) mixtures = true;
        }
        auto add = [&](DiscreteMeasure m, std::string sel, std::optional<double> c, std::optional<std::size_t> atom) {
            const double tau = f.stat(m);
            std::vector<std::size_t> src = atom ? split_sources(m0.size(), *atom) : identity_sources(m0.size());
            EquilibriumResult r{sg, std::move(m), std::move(src), std::move(sel), c, atom, Multiplicity::unknown,
                                mixtures && !branch_mode, std::abs(tau - sg), {}, kNaN, kNaN};
            found.push_back(std::move(r));
        };
        for (const Branch& b : pr.branches)
            if (std::abs(b.tau - sg) <= ctol) add(b.measure, pick_label(pr.per_atom, b.picks), std::nullopt, std::nullopt);
        if (!branch_mode) {
            for (std::size_t jj = 0; jj < multi.branched.size(); ++jj) {
                const std::size_t j = multi.branched[jj];
                for (const Branch& b : pr.branches) {
                    if (b.picks[j] != 0) continue;  // each pattern of the other atoms once
                    std::vector<std::size_t> up = b.picks;
                    up[j] = pr.per_atom[j].argmins.size() - 1;
                    const double tl = b.tau;
                    const double tu = f.stat(measure_of(m0, pr.per_atom, up));
                    if (std::abs(tu - tl) <= 1e-12 * (1.0 + std::abs(tl))) continue;
                    const double c = (sg - tl) / (tu - tl);
                    if (!(c > 1e-9 && c < 1.0 - 1e-9)) continue;
                    DiscreteMeasure m = split_measure(m0, pr.per_atom, b.picks, j, c);
                    if (std::abs(f.stat(m) - sg) > ctol) continue;
                    add(std::move(m), "split", c, j);
                }
            }
        }
    }

    // Deduplicate by W2, then order deterministically.
    std::vector<EquilibriumResult> uniq_eq;
    for (auto& r : found) {
        const bool dup = std::any_of(uniq_eq.begin(), uniq_eq.end(), [&](const EquilibriumResult& u) {
            return wasserstein2_1d(u.measure, r.measure) < opts.dedupe_w2;
        });
        if (!dup) uniq_eq.push_back(std::move(r));
    }
    std::stable_sort(uniq_eq.begin(), uniq_eq.end(), [](const EquilibriumResult& a, const EquilibriumResult& b) {
        if (a.sigma != b.sigma) return a.sigma < b.sigma;
        const double ma = mean(a.measure)[0], mb = mean(b.measure)[0];
        if (ma != mb) return ma < mb;
        return a.selection < b.selection;
    });
    for (auto& r : uniq_eq) {
        r.value_certificate = refined_certificate(s, m0, T, r, ro, r.atom_values);
        double worst = kNaN;
        const FrozenTerminal term = s.frozen(r.sigma);
        if (term.slope) {
            for (std::size_t k = 0; k < r.measure.size(); ++k) {
                const double y = r.measure.x(k);
                const bool kink = std::any_of(s.kinks.begin(), s.kinks.end(), [&](double kk) { return std::abs(kk - y) < 1e-9; });
                if (kink) continue;
                const double res = std::abs(y - m0.x(r.sources[k]) + T * term.slope(y));
                worst = std::isnan(worst) ? res : std::max(worst, res);
            }
        }
        r.max_foc_residual = worst;
        if (uniq_eq.size() > 1) r.multiplicity = Multiplicity::one_of_several;
        else if (out.scan_monotone && out.crossings == 1) r.multiplicity = Multiplicity::unique_certified;
        else r.multiplicity = Multiplicity::unknown;
    }
    out.equilibria = std::move(uniq_eq);
    return out;
}

MassSplit mass_split_fraction(const Scenario& s, const DiscreteMeasure& m0, double T, double sigma) {
    if (s.name != "special_unique") throw PreconditionError("mass splitting rule is specific to special_unique");
    const FactoredTerminal& f = *s.factored;
    MassSplit ms{true, kNaN, 0, kNaN};
    if (sigma == 0.0) return ms;
    const FrozenTerminal term = s.frozen(sigma);
    std::vector<MinimizerSet> sets;
    for (std::size_t i = 0; i < m0.size(); ++i) sets.push_back(respond(s, m0.x(i), T, term, sigma));
    const double xs = 1.0 + 1.5 * sigma * T;
    std::optional<std::size_t> j;
    for (std::size_t i = 0; i < m0.size(); ++i) {
        if (sets[i].argmins.size() > 1 || std::abs(m0.x(i) - xs) <= 1e-7 * (1.0 + std::abs(xs))) {
            if (j && m0.x(*j) != m0.x(i)) throw PreconditionError("several atoms split; the fraction is not determined");
            if (!j) j = i;
        }
    }
    if (!j) return ms;
    const double x = m0.x(*j);
    // Destinations at the splitting atom: the two co-optimal points.
    double yl = sets[*j].lower(), yu = sets[*j].upper();
    if (sets[*j].argmins.size() < 2) {
        yl = x - 2.0 * sigma * T;
        yu = x - sigma * T;
        if (yl > yu) std::swap(yl, yu);
    }
    double base = f.stat.offset;
    double wj = 0.0;
    for (std::size_t i = 0; i < m0.size(); ++i) {
        if (m0.x(i) == x) wj += m0.weight(i);
        else base += m0.weight(i) * f.stat.psi(sets[i].lower());
    }
    const double pl = f.stat.psi(yl), pu = f.stat.psi(yu);
    const double c = (sigma - base - wj * pl) / (wj * (pu - pl));
    if (!(c >= -1e-9 && c <= 1.0 + 1e-9)) throw DomainError("mass fraction " + fmt(c) + " outside [0,1]; sigma is not a fixed point");
    ms.independent = false;
    ms.c = std::clamp(c, 0.0, 1.0);
    ms.atom = *j;
    ms.reproduced_sigma = base + wj * (ms.c * pu + (1.0 - ms.c) * pl);
    return ms;
}

}  // namespace mfg
