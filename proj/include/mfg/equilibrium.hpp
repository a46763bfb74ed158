#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mfg/control.hpp"
#include "mfg/measure.hpp"
#include "mfg/models.hpp"
#include "mfg/randvar.hpp"

namespace mfg {

/// How to resolve an agent with several optimal destinations.
struct SelectionPolicy {
    enum class Kind { lower, upper, split, enumerate };
    Kind kind = Kind::lower;
    double c = 0.5;  // split: mass fraction sent to the upper minimizer

    static SelectionPolicy lower() { return {Kind::lower, 0.0}; }
    static SelectionPolicy upper() { return {Kind::upper, 0.0}; }
    static SelectionPolicy split(double c) { return {Kind::split, c}; }
    static SelectionPolicy enumerate() { return {Kind::enumerate, 0.0}; }
};

struct ResponseOptions {
    MinimizerOptions minimizer;
    std::optional<ResponseMode> mode;  // overrides the scenario's mode
    std::size_t max_branch_atoms = 4;  // B: multi-minimizer atoms branched over
};

/// Optimal destinations of an agent starting at x against a frozen terminal.
/// sigma is used by closed-form root rules; pass NaN for non-factored games.
MinimizerSet respond(const Scenario& s, double x, double T, const FrozenTerminal& term, double sigma,
                     const ResponseOptions& opts = {});

/// One pure selection: picks[i] indexes the response set of atom (or outcome) i.
struct Branch {
    std::vector<std::size_t> picks;
    DiscreteMeasure measure;
    double tau;  // statistic of the induced measure; NaN when not factored
};

/// Image of sigma under the parameter best-response map. When the responses
/// come from global minimization and at most one atom has several
/// minimizers, the image is the interval `hull` (mass may split); otherwise
/// it is the set of branch values.
struct ParameterResponse {
    double sigma;
    std::vector<MinimizerSet> per_atom;
    Interval hull;        // [min, max] of the statistic over all selections and splits
    bool is_interval;
    std::vector<Branch> branches;
    std::size_t multi_atoms = 0;
    bool truncated = false;  // more multi-minimizer atoms than max_branch_atoms
};

ParameterResponse parameter_response(const Scenario& s, const DiscreteMeasure& m0, double T, double sigma,
                                     const ResponseOptions& opts = {});

/// Terminal laws of optimal play against population m. One measure unless
/// the policy is enumerate.
std::vector<DiscreteMeasure> terminal_best_response(const Scenario& s, const DiscreteMeasure& m0, double T,
                                                    const DiscreteMeasure& m, SelectionPolicy policy,
                                                    const ResponseOptions& opts = {});

/// Outcome-wise optimal destinations for starting positions X0 against the
/// law of X. Mass splitting has no random-variable form and is rejected.
std::vector<RandomVariable> lifted_best_response(const Scenario& s, const RandomVariable& x0, double T,
                                                 const RandomVariable& x, SelectionPolicy policy,
                                                 const ResponseOptions& opts = {});

struct BisectionOptions {
    double tol = 1e-9;         // bracket width at which to stop; 0 runs to full precision
    Interval bracket{-1e3, 1e3};
    double widen_factor = 10.0;
    int max_widen = 2;
    int spot_checks = 33;      // nonincreasing check of the map on the bracket
};

struct SigmaFixedPoint {
    double sigma;
    Interval image;    // value of the map at sigma
    Interval bracket;  // final bracket
    int iterations;
};

/// Root of 0 in sigma - E(sigma) for an interval-valued nonincreasing E.
SigmaFixedPoint fixed_point_bisection(const std::function<Interval(double)>& map, const BisectionOptions& opts = {});

/// Same with E = hull of parameter_response; the default bracket is clipped
/// to the statistic's range.
SigmaFixedPoint fixed_point_bisection(const Scenario& s, const DiscreteMeasure& m0, double T,
                                      BisectionOptions opts = {}, const ResponseOptions& ropts = {});

struct PicardReport {
    enum class Status { converged, diverged, max_iterations };
    Status status;
    double sigma;
    int iterations;
    std::vector<double> trace;  // iterates, starting point first
};

/// sigma <- (1 - lambda) sigma + lambda map(sigma). NaN raises NumericalError.
PicardReport fixed_point_picard(const std::function<double(double)>& map, double start, double lambda = 1.0,
                                int max_iter = 10000, double tol = 1e-12, double blowup = 1e12);

enum class Multiplicity { unique_certified, one_of_several, unknown };
std::string multiplicity_name(Multiplicity m);

struct EquilibriumResult {
    double sigma;
    DiscreteMeasure measure;
    std::vector<std::size_t> sources;  // m0 atom feeding each measure atom
    std::string selection;             // "lower", "upper", "branch:0110", "split"
    std::optional<double> split_c;
    std::optional<std::size_t> split_atom;
    Multiplicity multiplicity = Multiplicity::unknown;
    bool admits_mixtures = false;      // co-optimal destinations share the statistic
    double consistency_residual;       // |sigma_T(measure) - sigma|
    std::vector<double> atom_values;   // optimal cost of each m0 atom
    double value_certificate;          // worst excess over a refined re-minimization
    double max_foc_residual;           // NaN if none applicable
};

struct EnumerateOptions {
    std::size_t scan_points = 257;
    std::optional<Interval> bracket;   // defaults to the statistic's range clipped to [-1e3, 1e3]
    double dedupe_w2 = 1e-6;
    double consistency_tol = 1e-8;     // relative to 1 + |sigma|
    ResponseOptions response;
};

struct EquilibriumSet {
    std::vector<EquilibriumResult> equilibria;
    std::size_t crossings = 0;
    bool scan_monotone = false;        // sigma - E(sigma) nondecreasing on the scan
    std::size_t undefined_points = 0;  // scan points without a best response
};

EquilibriumSet enumerate_equilibria(const Scenario& s, const DiscreteMeasure& m0, double T,
                                    const EnumerateOptions& opts = {});

/// Mass fraction on the upper minimizer at the splitting atom
/// x = 1 + 3 sigma T / 2 of special_unique. `independent` when no atom of m0
/// splits (or sigma = 0), in which case c plays no role.
struct MassSplit {
    bool independent;
    double c;
    std::size_t atom;
    double reproduced_sigma;
};
MassSplit mass_split_fraction(const Scenario& s, const DiscreteMeasure& m0, double T, double sigma);

}  // namespace mfg
