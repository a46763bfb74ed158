#include "mfg/monotonicity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "mfg/error.hpp"
#include "mfg/kernels.hpp"

namespace mfg {

namespace {

constexpr double kKinkGuard = 1e-12;

const FactoredTerminal& need_factored(const Scenario& s, const char* what) {
    if (!s.factored) throw PreconditionError(std::string(what) + " needs a factored terminal; '" + s.name + "' is not");
    return *s.factored;
}

void need_terminal(const Scenario& s) {
    if (!s.G || !s.dxG) throw PreconditionError("scenario '" + s.name + "' carries no terminal coupling");
}

RandomVariable from_measure(const DiscreteMeasure& m) {
    return RandomVariable(SampleSpace::make(m.weights()), m.atoms(), m.dim());
}

// Selection maximizing c * y * d[w] outcome-wise (c = +1 or -1).
std::vector<double> aligned_selection(const std::vector<MinimizerSet>& sets, const std::vector<double>& d, double c) {
    std::vector<double> out(sets.size());
    for (std::size_t w = 0; w < sets.size(); ++w) {
        const auto& a = sets[w].argmins;
        out[w] = a.front();
        for (double y : a)
            if (c * y * d[w] > c * out[w] * d[w]) out[w] = y;
    }
    return out;
}

std::vector<MinimizerSet> lifted_sets(const Scenario& s, const RandomVariable& x0, double T, const RandomVariable& x,
                                      const ResponseOptions& opts) {
    require_same_space(x0, x);
    if (x0.dim() != 1 || x.dim() != 1) throw DimensionError("lifted responses are implemented for d = 1");
    const DiscreteMeasure lx = law(x);
    const double sigma = s.factored ? s.sigma(lx) : std::numeric_limits<double>::quiet_NaN();
    const FrozenTerminal term = s.frozen(lx);
    std::vector<MinimizerSet> sets;
    sets.reserve(x0.size());
    for (std::size_t w = 0; w < x0.size(); ++w) sets.push_back(respond(s, x0.value(w), T, term, sigma, opts));
    return sets;
}

std::vector<double> select(const Scenario& s, const RandomVariable& x0, double T, const RandomVariable& x,
                           const std::vector<MinimizerSet>& sets, const Pick& p, const std::vector<double>& d,
                           const ResponseOptions& opts) {
    std::vector<double> out(sets.size());
    switch (p.kind) {
        case Pick::Kind::lower:
            for (std::size_t w = 0; w < sets.size(); ++w) out[w] = sets[w].lower();
            return out;
        case Pick::Kind::upper:
            for (std::size_t w = 0; w < sets.size(); ++w) out[w] = sets[w].upper();
            return out;
        case Pick::Kind::aligned: return aligned_selection(sets, d, p.c >= 0.0 ? 1.0 : -1.0);
        case Pick::Kind::hull:
            throw PreconditionError("mixed selections have no random-variable form; use lower, upper or branch");
        case Pick::Kind::branch: {
            const auto all = lifted_best_response(s, x0, T, x, SelectionPolicy::enumerate(), opts);
            if (p.index >= all.size()) throw DomainError("branch index out of range");
            return all[p.index].values();
        }
    }
    return out;
}

}  // namespace

std::string condition_name(Condition c) {
    switch (c) {
        case Condition::LL: return "LL";
        case Condition::D: return "D";
        case Condition::sigma: return "sigma";
        case Condition::L2: return "L2";
        case Condition::neg_sigma: return "-sigma";
        case Condition::neg_L2: return "-L2";
    }
    return "?";
}

std::optional<Condition> parse_condition(std::string_view s) {
    if (s == "LL") return Condition::LL;
    if (s == "D") return Condition::D;
    if (s == "sigma") return Condition::sigma;
    if (s == "L2") return Condition::L2;
    if (s == "-sigma" || s == "neg_sigma") return Condition::neg_sigma;
    if (s == "-L2" || s == "neg_L2") return Condition::neg_L2;
    return std::nullopt;
}

double ll_gap(const Scenario& s, const DiscreteMeasure& m1, const DiscreteMeasure& m2) {
    need_terminal(s);
    auto diff = [&](double x) { return s.G(x, m1) - s.G(x, m2); };
    return integrate(m1, diff) - integrate(m2, diff);
}

double d_gap(const Scenario& s, const RandomVariable& x1, const RandomVariable& x2) {
    need_terminal(s);
    require_same_space(x1, x2);
    if (x1.dim() != 1) throw DimensionError("D is implemented for d = 1");
    for (const RandomVariable* x : {&x1, &x2})
        for (double v : x->values())
            for (double k : s.kinks)
                if (std::abs(v - k) <= kKinkGuard) {
                    std::ostringstream os;
                    os.precision(17);
                    os << "outcome value " << v << " sits on the kink at " << k << "; D_xG is undefined there";
                    throw KinkError(os.str());
                }
    const DiscreteMeasure l1 = law(x1), l2 = law(x2);
    std::vector<double> a(x1.size()), b(x1.size());
    if (s.factored) {
        const double s1 = s.sigma(l1), s2 = s.sigma(l2);
        for (std::size_t w = 0; w < x1.size(); ++w) {
            a[w] = s.factored->dx(x1.value(w), s1) - s.factored->dx(x2.value(w), s2);
            b[w] = x1.value(w) - x2.value(w);
        }
    } else {
        for (std::size_t w = 0; w < x1.size(); ++w) {
            a[w] = s.dxG(x1.value(w), l1) - s.dxG(x2.value(w), l2);
            b[w] = x1.value(w) - x2.value(w);
        }
    }
    return kernels::dot3(x1.space()->weights(), a, b);
}

SecondOrderForm d_second_order(const Scenario& s, const RandomVariable& x, const RandomVariable& y) {
    require_same_space(x, y);
    if (x.dim() != 1) throw DimensionError("second-order forms are implemented for d = 1");
    SecondOrderForm out{};
    if (!s.factored) {
        double xs = 0.0, ys = 0.0;
        for (double v : x.values()) xs = std::max(xs, std::abs(v));
        for (double v : y.values()) ys = std::max(ys, std::abs(v));
        if (ys == 0.0) return {0.0, std::nullopt};
        const double eps = 1e-3 * (1.0 + xs) / ys;
        auto q = [&](double e) { return d_gap(s, RandomVariable::combine(1.0, x, e, y), x) / (e * e); };
        out.general = (4.0 * q(0.5 * eps) - q(eps)) / 3.0;
        return out;
    }
    const FactoredTerminal& f = *s.factored;
    const double sig = s.sigma(law(x));
    const auto& wts = x.space()->weights();
    double quad = 0.0, cross = 0.0, dstat = 0.0;
    for (std::size_t w = 0; w < x.size(); ++w) {
        const double xv = x.value(w), yv = y.value(w);
        quad += wts[w] * g_xx(f, xv, sig) * yv * yv;
        cross += wts[w] * g_xs(f, xv, sig) * yv;
        dstat += wts[w] * f.stat.dpsi(xv) * yv;
    }
    out.general = quad + cross * dstat;
    if (s.name == "disp_phi_quadratic") {
        // g = phi(s) x^2 / 2 with s = \int x^2 / 2; phi' read off dg/ds at x = 1
        const double phi = f.dxx(0.0, sig);
        const double dphi = 2.0 * f.ds(1.0, sig);
        double v2 = 0.0, xv = 0.0;
        for (std::size_t w = 0; w < x.size(); ++w) {
            v2 += wts[w] * y.value(w) * y.value(w);
            xv += wts[w] * x.value(w) * y.value(w);
        }
        out.specialized = phi * v2 + dphi * xv * xv;
    }
    return out;
}

SecondOrderForm d_second_order(const Scenario& s, const DiscreteMeasure& m, std::span<const double> v) {
    if (v.size() != m.size()) throw DimensionError("direction must have one entry per atom");
    const RandomVariable x = from_measure(m);
    return d_second_order(s, x, RandomVariable(x.space(), std::vector<double>(v.begin(), v.end()), 1));
}

double ll_second_order(const Scenario& s, const RandomVariable& x, const RandomVariable& y) {
    const FactoredTerminal& f = need_factored(s, "the LL second-order form");
    require_same_space(x, y);
    const double sig = s.sigma(law(x));
    const auto& wts = x.space()->weights();
    double cross = 0.0, dstat = 0.0;
    for (std::size_t w = 0; w < x.size(); ++w) {
        cross += wts[w] * g_xs(f, x.value(w), sig) * y.value(w);
        dstat += wts[w] * f.stat.dpsi(x.value(w)) * y.value(w);
    }
    return cross * dstat;
}

std::string pick_name(const Pick& p) {
    std::ostringstream os;
    switch (p.kind) {
        case Pick::Kind::lower: return "lower";
        case Pick::Kind::upper: return "upper";
        case Pick::Kind::hull:
            os.precision(17);
            os << "hull:" << p.c;
            return os.str();
        case Pick::Kind::branch: return "branch:" + std::to_string(p.index);
        case Pick::Kind::aligned: return p.c >= 0.0 ? "aligned:+" : "aligned:-";
    }
    return "?";
}

double pick_tau(const ParameterResponse& pr, const Pick& p) {
    switch (p.kind) {
        case Pick::Kind::lower: return pr.hull.lo;
        case Pick::Kind::upper: return pr.hull.hi;
        case Pick::Kind::hull:
            if (!pr.is_interval) throw PreconditionError("the response is a branch set, not an interval");
            if (!(p.c >= 0.0 && p.c <= 1.0)) throw DomainError("hull position outside [0,1]");
            return pr.hull.lo + p.c * (pr.hull.hi - pr.hull.lo);
        case Pick::Kind::branch:
            if (p.index >= pr.branches.size()) throw DomainError("branch index out of range");
            return pr.branches[p.index].tau;
        case Pick::Kind::aligned:
            throw PreconditionError("aligned picks apply to random variables only");
    }
    return std::numeric_limits<double>::quiet_NaN();
}

double sigma_gap(const Scenario& s, const DiscreteMeasure& m0, double T, double s1, double s2, Pick p1, Pick p2,
                 const ResponseOptions& opts) {
    need_factored(s, "the sigma condition");
    const double t1 = pick_tau(parameter_response(s, m0, T, s1, opts), p1);
    const double t2 = pick_tau(parameter_response(s, m0, T, s2, opts), p2);
    return (t1 - t2) * (s1 - s2) - (s1 - s2) * (s1 - s2);
}

double l2_gap(const Scenario& s, const RandomVariable& x0, double T, const RandomVariable& x1,
              const RandomVariable& x2, Pick p1, Pick p2, const ResponseOptions& opts) {
    require_same_space(x0, x1);
    require_same_space(x1, x2);
    std::vector<double> d(x1.size());
    for (std::size_t w = 0; w < d.size(); ++w) d[w] = x1.value(w) - x2.value(w);
    const auto y1 = select(s, x0, T, x1, lifted_sets(s, x0, T, x1, opts), p1, d, opts);
    const auto y2 = select(s, x0, T, x2, lifted_sets(s, x0, T, x2, opts), p2, d, opts);
    std::vector<double> dy(d.size());
    for (std::size_t w = 0; w < d.size(); ++w) dy[w] = y1[w] - y2[w];
    const auto& wts = x1.space()->weights();
    return kernels::dot3(wts, dy, d) - kernels::dot3(wts, d, d);
}

namespace {

void set_margin(Witness& w, double lhs, double rhs) {
    w.lhs = lhs;
    w.rhs = rhs;
    switch (w.condition) {
        case Condition::LL:
        case Condition::D: w.margin = lhs; break;
        case Condition::sigma:
        case Condition::L2: w.margin = rhs - lhs; break;
        case Condition::neg_sigma:
        case Condition::neg_L2: w.margin = lhs - rhs; break;
    }
}

double sq_norm_diff(const RandomVariable& a, const RandomVariable& b) {
    std::vector<double> d(a.size());
    for (std::size_t w = 0; w < d.size(); ++w) d[w] = a.value(w) - b.value(w);
    return kernels::dot3(a.space()->weights(), d, d);
}

}  // namespace

double evaluate(const Scenario& s, Witness& w, const ResponseOptions& opts) {
    switch (w.condition) {
        case Condition::LL:
            set_margin(w, ll_gap(s, *w.m1, *w.m2), 0.0);
            break;
        case Condition::D:
            set_margin(w, d_gap(s, *w.x1, *w.x2), 0.0);
            break;
        case Condition::sigma:
        case Condition::neg_sigma: {
            const double ds = w.s1 - w.s2;
            const double gap = sigma_gap(s, *w.m0, w.T, w.s1, w.s2, w.pick1, w.pick2, opts);
            set_margin(w, gap + ds * ds, ds * ds);
            break;
        }
        case Condition::L2:
        case Condition::neg_L2: {
            const double rhs = sq_norm_diff(*w.x1, *w.x2);
            const double gap = l2_gap(s, *w.x0, w.T, *w.x1, *w.x2, w.pick1, w.pick2, opts);
            set_margin(w, gap + rhs, rhs);
            break;
        }
    }
    return w.margin;
}

bool violates(const Witness& w) { return w.margin < -1e-9 * (1.0 + std::abs(w.lhs) + std::abs(w.rhs)); }

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Portable draws: the standard distributions are not specified bit-for-bit.
struct Rng {
    std::mt19937_64 gen;
    explicit Rng(std::uint64_t seed) : gen(splitmix64(seed)) {}
    double unit() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(gen() % n); }
    double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
};

std::vector<double> simplex(Rng& r, std::size_t n) {
    std::vector<double> w(n);
    double sum = 0.0;
    for (auto& v : w) sum += (v = r.uniform(0.05, 1.0));
    for (auto& v : w) v /= sum;
    return w;
}

DiscreteMeasure random_measure(Rng& r, const SamplerConfig& cfg) {
    const std::size_t n = 1 + r.below(cfg.max_atoms);
    std::vector<double> x(n);
    for (auto& v : x) v = r.uniform(cfg.coords.lo, cfg.coords.hi);
    return DiscreteMeasure(std::move(x), simplex(r, n), 1);
}

std::vector<double> random_values(Rng& r, std::size_t n, const Interval& box) {
    std::vector<double> x(n);
    for (auto& v : x) v = r.uniform(box.lo, box.hi);
    return x;
}

std::vector<double> perturb(Rng& r, const std::vector<double>& base, const Interval& box) {
    const double delta = r.log_uniform(1e-4, 10.0);
    std::vector<double> out(base.size());
    for (std::size_t i = 0; i < base.size(); ++i)
        out[i] = std::clamp(base[i] + delta * r.uniform(-1.0, 1.0), box.lo, box.hi);
    return out;
}

Interval sigma_box(const Scenario& s, const SamplerConfig& cfg) {
    if (cfg.sigma_range) return *cfg.sigma_range;
    const Interval& r = s.factored->stat.range;
    Interval out{std::max(r.lo, cfg.coords.lo), std::min(r.hi, cfg.coords.hi)};
    if (!(out.hi > out.lo)) throw PreconditionError("empty sigma sampling range");
    return out;
}

const DiscreteMeasure& pick_m0(Rng& r, const SamplerConfig& cfg, std::optional<DiscreteMeasure>& scratch) {
    if (!cfg.m0_family.empty()) return cfg.m0_family[r.below(cfg.m0_family.size())];
    scratch = random_measure(r, cfg);
    return *scratch;
}

void enforce_moment(const Scenario& s, std::vector<double>& x, const std::vector<double>& w) {
    if (!s.moment_bound) return;
    const double m2 = kernels::dot3(w, x, x);
    const double M = *s.moment_bound;
    if (m2 > M * M) {
        const double k = M / std::sqrt(m2) * (1.0 - 1e-12);
        for (auto& v : x) v *= k;
    }
}

// Candidate selections for one sampled pair; the best response is computed
// once per side and every extreme pairing is scored.
std::vector<Witness> score_sigma(const Scenario& s, Condition c, const DiscreteMeasure& m0, double T, double s1,
                                 double s2, const ResponseOptions& opts) {
    const ParameterResponse r1 = parameter_response(s, m0, T, s1, opts);
    const ParameterResponse r2 = parameter_response(s, m0, T, s2, opts);
    const double ds = s1 - s2;
    std::vector<Witness> out;
    for (const Pick& p1 : {Pick::lower(), Pick::upper()})
        for (const Pick& p2 : {Pick::lower(), Pick::upper()}) {
            Witness w;
            w.condition = c;
            w.m0 = m0;
            w.T = T;
            w.s1 = s1;
            w.s2 = s2;
            w.pick1 = p1;
            w.pick2 = p2;
            set_margin(w, (pick_tau(r1, p1) - pick_tau(r2, p2)) * ds, ds * ds);
            out.push_back(std::move(w));
        }
    return out;
}

std::vector<Witness> score_l2(const Scenario& s, Condition c, const RandomVariable& x0, double T,
                              const RandomVariable& x1, const RandomVariable& x2, const ResponseOptions& opts) {
    const auto sets1 = lifted_sets(s, x0, T, x1, opts);
    const auto sets2 = lifted_sets(s, x0, T, x2, opts);
    std::vector<double> d(x1.size());
    for (std::size_t w = 0; w < d.size(); ++w) d[w] = x1.value(w) - x2.value(w);
    const auto& wts = x1.space()->weights();
    const double rhs = kernels::dot3(wts, d, d);
    const std::pair<Pick, Pick> pairs[] = {{Pick::lower(), Pick::lower()}, {Pick::upper(), Pick::upper()},
                                           {Pick::lower(), Pick::upper()}, {Pick::upper(), Pick::lower()},
                                           {Pick::aligned(1.0), Pick::aligned(-1.0)}, {Pick::aligned(-1.0), Pick::aligned(1.0)}};
    std::vector<Witness> out;
    for (const auto& [p1, p2] : pairs) {
        const auto y1 = select(s, x0, T, x1, sets1, p1, d, opts);
        const auto y2 = select(s, x0, T, x2, sets2, p2, d, opts);
        std::vector<double> dy(d.size());
        for (std::size_t w = 0; w < d.size(); ++w) dy[w] = y1[w] - y2[w];
        Witness wit;
        wit.condition = c;
        wit.x0 = x0;
        wit.x1 = x1;
        wit.x2 = x2;
        wit.T = T;
        wit.pick1 = p1;
        wit.pick2 = p2;
        set_margin(wit, kernels::dot3(wts, dy, d), rhs);
        out.push_back(std::move(wit));
    }
    return out;
}

std::vector<Witness> draw(const Scenario& s, Condition c, const SamplerConfig& cfg, Rng& r) {
    const bool close = r.unit() < cfg.close_pair_fraction;
    const double T = cfg.T_values[r.below(cfg.T_values.size())];
    switch (c) {
        case Condition::LL: {
            Witness w;
            w.condition = c;
            w.m1 = random_measure(r, cfg);
            if (close)
                w.m2 = DiscreteMeasure(perturb(r, w.m1->atoms(), cfg.coords), w.m1->weights(), 1);
            else
                w.m2 = random_measure(r, cfg);
            evaluate(s, w, cfg.response);
            return {w};
        }
        case Condition::D: {
            const std::size_t n = 1 + r.below(cfg.max_atoms);
            auto space = SampleSpace::make(simplex(r, n));
            Witness w;
            w.condition = c;
            w.x2 = RandomVariable(space, random_values(r, n, cfg.coords));
            w.x1 = RandomVariable(space, close ? perturb(r, w.x2->values(), cfg.coords) : random_values(r, n, cfg.coords));
            evaluate(s, w, cfg.response);
            return {w};
        }
        case Condition::sigma:
        case Condition::neg_sigma: {
            std::optional<DiscreteMeasure> scratch;
            const DiscreteMeasure& m0 = pick_m0(r, cfg, scratch);
            const Interval box = sigma_box(s, cfg);
            const double s2 = r.uniform(box.lo, box.hi);
            const double s1 = close ? perturb(r, {s2}, box)[0] : r.uniform(box.lo, box.hi);
            return score_sigma(s, c, m0, T, s1, s2, cfg.response);
        }
        case Condition::L2:
        case Condition::neg_L2: {
            SpacePtr space;
            std::vector<double> v0;
            if (!cfg.m0_family.empty()) {
                const DiscreteMeasure& m0 = cfg.m0_family[r.below(cfg.m0_family.size())];
                space = SampleSpace::make(m0.weights());
                v0 = m0.atoms();
            } else {
                const std::size_t n = 1 + r.below(cfg.max_atoms);
                space = SampleSpace::make(simplex(r, n));
                v0 = random_values(r, n, cfg.coords);
            }
            enforce_moment(s, v0, space->weights());
            const std::size_t n = space->size();
            RandomVariable x0(space, v0);
            RandomVariable x2(space, random_values(r, n, cfg.coords));
            RandomVariable x1(space, close ? perturb(r, x2.values(), cfg.coords) : random_values(r, n, cfg.coords));
            return score_l2(s, c, x0, T, x1, x2, cfg.response);
        }
    }
    return {};
}

// Halve the perturbation toward the second argument.
Witness halve(const Witness& w) {
    Witness h = w;
    switch (w.condition) {
        case Condition::LL: h.m1 = DiscreteMeasure::mixture(*w.m1, *w.m2, 0.5); break;
        case Condition::D:
        case Condition::L2:
        case Condition::neg_L2: h.x1 = RandomVariable::combine(0.5, *w.x1, 0.5, *w.x2); break;
        case Condition::sigma:
        case Condition::neg_sigma: h.s1 = w.s2 + 0.5 * (w.s1 - w.s2); break;
    }
    return h;
}

}  // namespace

MonotonicityReport refute(const Scenario& s, Condition c, const SamplerConfig& cfg, std::uint64_t seed) {
    if (c == Condition::LL || c == Condition::D) need_terminal(s);
    if (c == Condition::sigma || c == Condition::neg_sigma) need_factored(s, "the sigma condition");
    if (cfg.T_values.empty()) throw DomainError("no horizons to sample");
    if (cfg.max_atoms == 0) throw DomainError("max_atoms must be positive");
    MonotonicityReport rep;
    rep.condition = c;
    rep.seed = seed;
    Rng r(seed);
    for (std::size_t i = 0; i < cfg.budget; ++i) {
        ++rep.samples;
        std::vector<Witness> cands;
        try {
            cands = draw(s, c, cfg, r);
        } catch (const Error&) {
            ++rep.skipped;
            continue;
        }
        for (auto& w : cands)
            if (std::isfinite(w.margin) && (!rep.witness || w.margin < rep.witness->margin)) rep.witness = std::move(w);
    }
    rep.violated = rep.witness && violates(*rep.witness);
    if (rep.violated) {
        Witness cur = *rep.witness;
        for (int k = 0; k < cfg.shrink_steps; ++k) {
            Witness next = halve(cur);
            try {
                evaluate(s, next, cfg.response);
            } catch (const Error&) {
                break;
            }
            if (!violates(next)) break;
            cur = std::move(next);
        }
        rep.shrunk = std::move(cur);
    }
    return rep;
}

}  // namespace mfg
