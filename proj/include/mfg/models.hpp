#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mfg/control.hpp"
#include "mfg/measure.hpp"

namespace mfg {

using ParamRecord = std::map<std::string, double>;

/// sigma_T(m) = offset + \int psi dm. Its flat derivative D_m sigma_T(m, y) is
/// psi'(y), independent of m.
struct LinearStatistic {
    double offset = 0.0;
    std::function<double(double)> psi;
    std::function<double(double)> dpsi;
    Interval range{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};

    double operator()(const DiscreteMeasure& m) const;
};

/// G(x, m) = g(x, sigma_T(m)) with partial derivatives of g. Missing second
/// derivatives are replaced by central differences of dx.
struct FactoredTerminal {
    std::function<double(double, double)> g;
    std::function<double(double, double)> dx;
    std::function<double(double, double)> ds;
    std::function<double(double, double)> dxx;
    std::function<double(double, double)> dxs;
    LinearStatistic stat;
    /// sup_x |dx g(x, s)|, when finite.
    std::function<double(double)> slope_bound;
};

/// Running coupling F(x, m) = phi(x) \int phi dm for trajectory-level games.
struct RunningCoupling {
    std::function<double(double)> phi;
    std::function<double(double)> dphi;
};

enum class ResponseMode {
    global_grid,  // grid scan + refinement of the Hopf–Lax objective
    convex_foc,   // terminal convex in x: unique first-order root
    foc_roots,    // every first-order root (non-coercive terminals)
};

using Terminal = std::function<double(double, const DiscreteMeasure&)>;

struct Scenario {
    std::string name;
    std::size_t dim = 1;
    ParamRecord params;
    Terminal G;
    Terminal dxG;
    std::optional<FactoredTerminal> factored;
    std::optional<RunningCoupling> running;  // set when the Lagrangian carries the coupling
    std::vector<double> kinks;               // x where G(., m) is not differentiable
    std::optional<double> moment_bound;      // admissible m0 have E|x|^2 <= M^2
    ResponseMode response = ResponseMode::global_grid;
    /// Closed-form first-order roots (x, T, sigma) -> ascending roots.
    std::function<std::vector<double>(double, double, double)> foc_roots;
    /// Known structure, e.g. {"LL", "holds"}; informational.
    std::map<std::string, std::string> properties;

    bool is_factored() const { return factored.has_value(); }
    double sigma(const DiscreteMeasure& m) const;
    FrozenTerminal frozen(double sigma) const;
    FrozenTerminal frozen(const DiscreteMeasure& m) const;
};

std::vector<std::string> catalog_names();

/// Catalog entry by name; unknown names and parameters raise DomainError.
Scenario catalog(std::string_view name, const ParamRecord& params = {});

/// Central-difference check of dxG against G. Refuses to probe within 2h of
/// a declared kink.
struct FdCheck {
    double analytic;
    double numeric;
    double error;
    double tol;
    bool pass;
};
FdCheck dxG_fd_check(const Scenario& s, double x, const DiscreteMeasure& m, double h = 1e-5);

/// Second derivatives of g, falling back to differences of dx.
double g_xx(const FactoredTerminal& f, double x, double s);
double g_xs(const FactoredTerminal& f, double x, double s);

/// Horizon for the two-equilibria construction: the smallest tau on a
/// doubling ladder for which y^2/(2 tau) + phi(y) dips below phi(x0), the
/// positive minimizer y* of that function relative to x0, and T = tau / phi(y*).
struct TwoEquilibriaHorizon {
    double tau;
    double y_star;  // offset from x0; the equilibria sit at x0 ± y_star
    double T;
};
TwoEquilibriaHorizon two_equilibria_horizon(const Scenario& s);

}  // namespace mfg
