#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mfg/error.hpp"

namespace mfg {

struct Interval {
    double lo;
    double hi;
    double width() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
};

/// Terminal cost with the population held fixed: y -> G(y, m) or g(y, sigma).
struct FrozenTerminal {
    std::function<double(double)> value;
    std::function<double(double)> slope;  // derivative in y; may be empty
    std::vector<double> kinks;            // points where slope is undefined
    double slope_bound = std::numeric_limits<double>::quiet_NaN();  // sup |slope| if known
};

inline double value_tol(double v) { return 1e-9 * (1.0 + std::abs(v)); }
inline double sep_tol(const Interval& bracket) { return 1e-4 * bracket.width(); }
inline double foc_tol(double x) { return 1e-6 * (1.0 + std::abs(x)); }

struct MinimizerOptions {
    std::size_t grid_n = 4096;
    int max_widen = 6;
    bool allow_boundary = false;     // accept minima on the bracket ends
    std::size_t max_candidates = 64; // grid basins refined per search
};

/// All global minimizers found in a bracket, ascending and pairwise farther
/// apart than sep_tol(bracket).
struct MinimizerSet {
    std::vector<double> argmins;
    std::vector<double> values;         // objective at each entry
    double value = std::numeric_limits<double>::quiet_NaN();  // least value
    std::vector<double> foc_residuals;  // NaN where not applicable (kinks, no slope)
    Interval bracket{0.0, 0.0};
    int widenings = 0;
    bool stationary_only = false;       // first-order roots rather than certified minima

    bool unique() const { return argmins.size() == 1; }
    double lower() const { return argmins.front(); }
    double upper() const { return argmins.back(); }
};

/// Global minimizers of y -> |x - y|^2 / (2T) + term(y). The grid scan runs
/// through the SIMD kernel; basins are refined by golden section and, where a
/// slope is available away from kinks, by bisection on the first-order
/// condition. The bracket doubles (up to max_widen times) while the minimum
/// touches its ends.
MinimizerSet minimize_terminal(double x, double T, const FrozenTerminal& term, Interval bracket,
                               const MinimizerOptions& opts = {});

/// Bracket for minimize_terminal derived from the slope bound when known.
Interval default_bracket(double x, double T, const FrozenTerminal& term);

/// Global minimizers of a continuous f on a closed interval. Unlike
/// minimize_terminal the bracket is not widened; boundary minima are kept when
/// opts.allow_boundary is set.
MinimizerSet minimize_on_interval(const std::function<double(double)>& f, Interval interval,
                                  const MinimizerOptions& opts = {});

/// Every root of y + T*slope(y) = x found by a sign-change scan of the bracket.
/// Values are filled in from term.value.
MinimizerSet first_order_roots(double x, double T, const FrozenTerminal& term, Interval bracket,
                               std::size_t grid_n = 4096);

/// The unique root of y + T*slope(y) = x when y -> y + T*slope(y) is
/// increasing (convex terminal). The bracket grows from x geometrically.
MinimizerSet convex_first_order(double x, double T, const FrozenTerminal& term);

/// For special_unique-type terminals: every minimizer obeys |y| <= |x| + 2T|sigma|.
struct BoundsCheck {
    bool pass;
    double bound;
    double worst;  // largest |y| among the argmins
};
BoundsCheck minimizer_bounds_check(double x, double sigma, double T, const MinimizerSet& set);

/// For G strictly increasing on the interval, every minimizer of F+G lies at
/// or below every minimizer of F.
struct OrderingCheck {
    bool pass;
    MinimizerSet sum;
    MinimizerSet base;
};
OrderingCheck fg_ordering_check(const std::function<double(double)>& F,
                                const std::function<double(double)>& G, Interval interval,
                                std::size_t grid_n = 4096);

/// Euler–Lagrange residuals for running cost phi(x) * phi(xi) with
/// phi = sqrt(2|x|) and terminal cost -T|x(T)|, on a uniform time grid
/// (curve.size() = N + 1 samples over [0, T]).
struct ElResidual {
    double interior;   // max_i |x''_i - phi'(x_i) phi(xi_i)|, central differences
    double terminal;   // |x'(T) - T sign(x(T))|, one-sided difference
    std::size_t worst_index;
};
ElResidual el_residual(std::span<const double> curve, std::span<const double> population, double T);
inline ElResidual el_residual(std::span<const double> curve, double T) {
    return el_residual(curve, curve, T);
}

/// Cost of a trajectory against a population path for the same running cost,
/// by the trapezoid rule on the shared grid; velocity by differences.
double running_cost_value(std::span<const double> curve, std::span<const double> population, double T);

/// Half-line minima of a*y + psi(y), coordinate i, d = 1:
/// F+ over [0, R], F- over [-R, 0], F = F+ - F-.
struct CoordinateF {
    double plus;
    double minus;
    double value;
    double argmin_plus;
    double argmin_minus;
};
CoordinateF coordinate_F(double a, const std::function<double(double)>& psi, double radius,
                         std::size_t grid_n = 4096);

struct ShockOptions {
    double t_start = 0.1;
    double t_growth = 1.5;
    int max_steps = 40;
    double radius = 10.0;    // search box for y is [-radius, radius]
    std::size_t grid_n = 4096;
};

/// A time and a point where the Hopf–Lax minimizer is not unique.
struct ShockCertificate {
    double t;
    double x;
    double y_lower;
    double y_upper;
    double value_lower;
    double value_upper;
    double a;            // slope solving F(a) = 0 for the tilted problem
    double probe_x0;
    double probe_h;
};

struct ShockSearch {
    std::optional<ShockCertificate> certificate;
    std::string reason;  // why nothing was found, when certificate is empty
    int steps = 0;
};

/// Search t = t_start * t_growth^k for a shock of the Hopf–Lax problem with
/// initial datum phi (one-dimensional). Throws PreconditionError when phi is
/// not bounded below on the box or grows at least quadratically.
ShockSearch find_shock(const std::function<double(double)>& phi, const ShockOptions& opts = {});

/// Recompute objective values at the certificate's minimizers.
double hopf_lax_objective(const std::function<double(double)>& phi, double t, double x, double y);

}  // namespace mfg
