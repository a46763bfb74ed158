#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "mfg/error.hpp"

namespace mfg {

/// Weights must sum to one within this tolerance; they are never renormalized.
inline constexpr double kWeightSumTol = 1e-12;

/// Finitely supported probability measure on R^d. Atoms are stored flat,
/// row-major (atom i occupies [i*d, (i+1)*d)). Repeated atoms are allowed and
/// kept as given.
class DiscreteMeasure {
public:
    DiscreteMeasure(std::vector<double> atoms, std::vector<double> weights, std::size_t dim = 1);

    static DiscreteMeasure dirac(double x);
    static DiscreteMeasure dirac(std::vector<double> point);
    /// Equal weights on the given one-dimensional points.
    static DiscreteMeasure uniform(std::vector<double> points);
    /// c*a + (1-c)*b, atoms concatenated.
    static DiscreteMeasure mixture(const DiscreteMeasure& a, const DiscreteMeasure& b, double c);

    std::size_t size() const { return weights_.size(); }
    std::size_t dim() const { return dim_; }
    std::span<const double> atom(std::size_t i) const {
        return {atoms_.data() + i * dim_, dim_};
    }
    /// First coordinate of atom i; the natural accessor in one dimension.
    double x(std::size_t i) const { return atoms_[i * dim_]; }
    double weight(std::size_t i) const { return weights_[i]; }
    const std::vector<double>& atoms() const { return atoms_; }
    const std::vector<double>& weights() const { return weights_; }

    std::string describe_atom(std::size_t i) const;

private:
    std::vector<double> atoms_;
    std::vector<double> weights_;
    std::size_t dim_;
};

namespace detail {
/// Weighted sum of per-atom values, rejecting non-finite entries by atom.
double integrate_values(const DiscreteMeasure& m, const std::vector<double>& values);
}  // namespace detail

/// \int f dm. f may take either a double (one-dimensional measures) or a
/// std::span<const double> holding the atom coordinates.
template <class F>
double integrate(const DiscreteMeasure& m, F&& f) {
    std::vector<double> values(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        if constexpr (std::is_invocable_v<F&, std::span<const double>>) {
            values[i] = f(m.atom(i));
        } else {
            if (m.dim() != 1) throw DimensionError("scalar-argument integrand needs a one-dimensional measure");
            values[i] = f(m.x(i));
        }
    }
    return detail::integrate_values(m, values);
}

/// f#m. The map returns a double (image in R) or a std::vector<double>.
/// Atoms with equal images are not merged.
template <class F>
DiscreteMeasure pushforward(const DiscreteMeasure& m, F&& f) {
    std::vector<double> out;
    std::size_t dim_out = 1;
    for (std::size_t i = 0; i < m.size(); ++i) {
        auto image = [&] {
            if constexpr (std::is_invocable_v<F&, std::span<const double>>) {
                return f(m.atom(i));
            } else {
                if (m.dim() != 1) throw DimensionError("scalar-argument map needs a one-dimensional measure");
                return f(m.x(i));
            }
        }();
        if constexpr (std::is_arithmetic_v<decltype(image)>) {
            out.push_back(static_cast<double>(image));
        } else {
            if (i == 0) dim_out = image.size();
            if (image.size() != dim_out || dim_out == 0) throw DimensionError("map images differ in dimension");
            out.insert(out.end(), image.begin(), image.end());
        }
    }
    return DiscreteMeasure(std::move(out), m.weights(), dim_out);
}

double second_moment(const DiscreteMeasure& m);
std::vector<double> mean(const DiscreteMeasure& m);

/// W2 distance between one-dimensional measures by quantile matching.
double wasserstein2_1d(const DiscreteMeasure& a, const DiscreteMeasure& b);

}  // namespace mfg
