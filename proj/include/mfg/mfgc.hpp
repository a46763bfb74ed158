#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mfg/measure.hpp"

namespace mfg::mfgc {

/// Convex running cost l(v) on R. The conjugate derivative (l*)'(p) is the
/// inverse of l'; presets supply it in closed form, others invert l' by
/// bisection to 1e-10.
struct ConvexCost {
    std::string name;
    std::function<double(double)> ell;
    std::function<double(double)> dell;
    std::function<double(double)> dconj;  // (l*)'(p); empty: invert dell numerically
    std::function<double(double)> conj;   // l*(p); empty: p v - l(v) at v = (l*)'(p)

    static ConvexCost quadratic();  // v^2 / 2
    static ConvexCost quartic();    // v^4, conjugate by numerical inversion
    static ConvexCost power(double k);  // |v|^k, k > 1

    double conjugate_derivative(double p) const;
    double conjugate(double p) const;
};

/// Second differences of l on [-10, 10] with n cells; DomainError if negative
/// beyond roundoff.
void check_convex(const ConvexCost& c, std::size_t n = 2048);

/// Uniform grid t_i = i T / N with values pi(t_i) in R^dim, stored row-major.
struct MarketCurve {
    double T = 1.0;
    std::size_t N = 1024;
    std::size_t dim = 1;
    std::vector<double> values;  // (N + 1) * dim

    static MarketCurve constant(double T, std::size_t N, std::vector<double> value);
    static MarketCurve from_function(double T, std::size_t N, const std::function<double(double)>& f);

    double t(std::size_t i) const { return T * static_cast<double>(i) / static_cast<double>(N); }
    double h() const { return T / static_cast<double>(N); }
    std::size_t points() const { return N + 1; }
    double at(std::size_t i, std::size_t k = 0) const { return values[i * dim + k]; }
    void validate() const;
};

/// H(t, p, pi) = l*(p) - a(t) p . pi with linear terminal g, Dg = c.
struct Game {
    ConvexCost ell;
    std::function<double(double)> a;
    std::vector<double> c;
    DiscreteMeasure m0 = DiscreteMeasure::dirac(0.0);
    double T = 1.0;
    std::size_t N = 1024;

    std::size_t dim() const { return c.size(); }
    void validate() const;
};

Game constant_a(ConvexCost ell, double a, std::vector<double> c, double T = 1.0, std::size_t N = 1024);

/// D_p H(t, p, pi) = (l*)'(p) - a(t) pi, componentwise.
std::vector<double> dpH(const Game& sc, double t, const std::vector<double>& p, const std::vector<double>& pi);

/// Pi(pi)_t = \int D_pH(t, -c, pi(t)) dm0; the integrand does not depend on
/// the starting point because g is linear.
MarketCurve market_map(const Game& sc, const MarketCurve& pi);

/// max_t |pi(t) - Pi(pi)(t)|.
double fixed_point_residual(const Game& sc, const MarketCurve& pi);

struct FixedPointMethod {
    enum class Kind { picard, monotone_root };
    Kind kind = Kind::picard;
    double lambda = 1.0;

    static FixedPointMethod picard(double lambda = 1.0) { return {Kind::picard, lambda}; }
    static FixedPointMethod monotone_root() { return {Kind::monotone_root, 0.0}; }
};

struct FixedPointReport {
    enum class Status { converged, diverged, max_iterations };
    Status status;
    MarketCurve curve;
    int iterations = 0;
    double residual;
    std::vector<double> trace;  // sup-norm residual per Picard step
};
std::string status_name(FixedPointReport::Status s);

struct FixedPointOptions {
    double tol = 1e-12;
    int max_iter = 10000;
    double blowup = 1e12;
};

/// Picard iteration pi <- (1 - lambda) pi + lambda Pi(pi), or, in d = 1, a
/// pointwise bisection on pi - Pi(pi), which must be strictly monotone in
/// pi(t) (PreconditionError otherwise).
FixedPointReport market_fixed_point(const Game& sc, const MarketCurve& start, FixedPointMethod method,
                                    const FixedPointOptions& opts = {});

/// [D_pH(t,p,pi1) - D_pH(t,p,pi2)] . (pi1 - pi2) - |pi1 - pi2|^2. Positive in
/// the regime where I - Pi is increasing, negative in the opposite one.
double pi_monotonicity_gap(const Game& sc, double t, const std::vector<double>& p,
                           const std::vector<double>& pi1, const std::vector<double>& pi2);

/// Trapezoid integral over [0, T] of <Pi(pi1) - pi1 - (Pi(pi2) - pi2), pi1 - pi2>.
double sigma_condition_h1(const Game& sc, const MarketCurve& pi1, const MarketCurve& pi2);

/// \int (l(v + a \int v dmu1) - l(v + a \int v dmu2)) d(mu1 - mu2)(v), d = 1.
double ll_mfgc_expression(const std::function<double(double)>& ell, double a, const DiscreteMeasure& mu1,
                          const DiscreteMeasure& mu2);

/// mu1 = b delta_x + (1 - b) delta_{(1 - b x)/(1 - b)}, which has mean 1.
DiscreteMeasure quartic_family(double b, double x);

}  // namespace mfg::mfgc
