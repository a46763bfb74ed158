#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mfg/equilibrium.hpp"
#include "mfg/measure.hpp"
#include "mfg/models.hpp"
#include "mfg/randvar.hpp"

namespace mfg {

enum class Condition { LL, D, sigma, L2, neg_sigma, neg_L2 };

std::string condition_name(Condition c);
/// Accepts LL, D, sigma, L2, -sigma, -L2 (also neg_sigma, neg_L2).
std::optional<Condition> parse_condition(std::string_view s);

/// \int (G(., m1) - G(., m2)) d(m1 - m2); LL holds when this is >= 0.
double ll_gap(const Scenario& s, const DiscreteMeasure& m1, const DiscreteMeasure& m2);

/// E[(D_xG(X1, L_X1) - D_xG(X2, L_X2)) (X1 - X2)]; D holds when >= 0.
/// Outcomes within 1e-12 of a declared kink raise KinkError.
double d_gap(const Scenario& s, const RandomVariable& x1, const RandomVariable& x2);

/// Second-order form of D at (m, v): \int g_xx v^2 dm + (\int g_xs v dm)(\int psi' v dm).
/// `specialized` is the closed form phi(s) \int v^2 + phi'(s)(\int x v)^2 for
/// disp_phi_quadratic. Non-factored scenarios use a Richardson-extrapolated
/// difference quotient of d_gap.
struct SecondOrderForm {
    double general;
    std::optional<double> specialized;
};
SecondOrderForm d_second_order(const Scenario& s, const DiscreteMeasure& m, std::span<const double> v);
SecondOrderForm d_second_order(const Scenario& s, const RandomVariable& x, const RandomVariable& y);

/// Second-order form of LL for factored terminals: E[g_xs(X) Y] E[psi'(X) Y].
double ll_second_order(const Scenario& s, const RandomVariable& x, const RandomVariable& y);

/// Which element of a set-valued best response to use.
struct Pick {
    enum class Kind { lower, upper, hull, branch, aligned };
    Kind kind = Kind::lower;
    double c = 0.0;           // hull: position in [lo, hi]; aligned: +1 or -1
    std::size_t index = 0;    // branch

    static Pick lower() { return {Kind::lower, 0.0, 0}; }
    static Pick upper() { return {Kind::upper, 0.0, 0}; }
    static Pick hull(double c) { return {Kind::hull, c, 0}; }
    static Pick branch(std::size_t i) { return {Kind::branch, 0.0, i}; }
    /// Random variables only: outcome-wise minimizer maximizing dir * y * (X1 - X2).
    static Pick aligned(double dir) { return {Kind::aligned, dir, 0}; }
};
std::string pick_name(const Pick& p);

/// For parameter responses lower/upper are the endpoints of the hull.
double pick_tau(const ParameterResponse& pr, const Pick& p);

/// <tau1 - tau2, s1 - s2> - |s1 - s2|^2 with tau_i picked from E_T(s_i);
/// sigma holds when <= 0.
double sigma_gap(const Scenario& s, const DiscreteMeasure& m0, double T, double s1, double s2, Pick p1, Pick p2,
                 const ResponseOptions& opts = {});

/// E[(Y1 - Y2)(X1 - X2)] - E|X1 - X2|^2 with Y_i picked from the lifted best
/// response; L2 holds when <= 0.
double l2_gap(const Scenario& s, const RandomVariable& x0, double T, const RandomVariable& x1,
              const RandomVariable& x2, Pick p1, Pick p2, const ResponseOptions& opts = {});

/// Everything needed to re-evaluate one sample.
struct Witness {
    Condition condition = Condition::LL;
    std::optional<DiscreteMeasure> m1, m2;     // LL
    std::optional<RandomVariable> x1, x2;      // D, L2
    std::optional<RandomVariable> x0;          // L2
    std::optional<DiscreteMeasure> m0;         // sigma
    double T = 1.0;
    double s1 = 0.0, s2 = 0.0;                 // sigma
    Pick pick1, pick2;
    double lhs = 0.0, rhs = 0.0;
    double margin = 0.0;                       // slack of the inequality; negative = violated
};

/// Recompute lhs, rhs and margin of a witness in place; returns the margin.
double evaluate(const Scenario& s, Witness& w, const ResponseOptions& opts = {});

/// True when the margin is below the roundoff floor -1e-9 (1 + |lhs| + |rhs|).
bool violates(const Witness& w);

struct SamplerConfig {
    std::size_t budget = 10000;
    std::size_t max_atoms = 6;
    Interval coords{-10.0, 10.0};
    std::vector<double> T_values{0.1, 1.0, 10.0};
    std::vector<DiscreteMeasure> m0_family;     // empty: random initial measures
    std::optional<Interval> sigma_range;        // default: statistic range clipped to coords
    double close_pair_fraction = 0.5;           // samples drawn as small perturbations
    int shrink_steps = 40;
    ResponseOptions response;
};

struct MonotonicityReport {
    Condition condition = Condition::LL;
    std::uint64_t seed;
    bool violated = false;
    std::size_t samples = 0;
    std::size_t skipped = 0;                    // samples with no defined best response
    std::optional<Witness> witness;             // worst sample
    std::optional<Witness> shrunk;              // simplified violating witness
    double worst_margin() const { return witness ? witness->margin : 0.0; }
};

/// Seeded randomized search for a violation. Deterministic for a given
/// (scenario, condition, config, seed).
MonotonicityReport refute(const Scenario& s, Condition c, const SamplerConfig& cfg, std::uint64_t seed);

}  // namespace mfg
