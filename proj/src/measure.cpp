#include "mfg/measure.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "mfg/kernels.hpp"

namespace mfg {

DiscreteMeasure::DiscreteMeasure(std::vector<double> atoms, std::vector<double> weights, std::size_t dim)
    : atoms_(std::move(atoms)), weights_(std::move(weights)), dim_(dim) {
    if (dim_ == 0) throw DimensionError("measure dimension must be positive");
    if (weights_.empty()) throw DomainError("measure needs at least one atom");
    if (atoms_.size() != weights_.size() * dim_)
        throw DimensionError("atom storage does not match weight count times dimension");
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        if (!std::isfinite(weights_[i]) || weights_[i] < 0.0)
            throw DomainError("weight of " + describe_atom(i) + " is negative or non-finite");
    }
    for (double a : atoms_)
        if (!std::isfinite(a)) throw DomainError("atom coordinates must be finite");
    const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
    if (std::abs(total - 1.0) > kWeightSumTol) {
        std::ostringstream os;
        os.precision(17);
        os << "weights sum to " << total << ", not 1";
        throw DomainError(os.str());
    }
}

DiscreteMeasure DiscreteMeasure::dirac(double x) { return DiscreteMeasure({x}, {1.0}, 1); }

DiscreteMeasure DiscreteMeasure::dirac(std::vector<double> point) {
    const std::size_t d = point.size();
    return DiscreteMeasure(std::move(point), {1.0}, d);
}

DiscreteMeasure DiscreteMeasure::uniform(std::vector<double> points) {
    const std::size_t n = points.size();
    if (n == 0) throw DomainError("measure needs at least one atom");
    return DiscreteMeasure(std::move(points), std::vector<double>(n, 1.0 / static_cast<double>(n)), 1);
}

DiscreteMeasure DiscreteMeasure::mixture(const DiscreteMeasure& a, const DiscreteMeasure& b, double c) {
    if (a.dim() != b.dim()) throw DimensionError("mixture of measures in different dimensions");
    if (!(c >= 0.0 && c <= 1.0)) throw DomainError("mixture fraction outside [0,1]");
    std::vector<double> atoms = a.atoms();
    atoms.insert(atoms.end(), b.atoms().begin(), b.atoms().end());
    std::vector<double> w;
    w.reserve(a.size() + b.size());
    for (double wi : a.weights()) w.push_back(c * wi);
    for (double wi : b.weights()) w.push_back((1.0 - c) * wi);
    return DiscreteMeasure(std::move(atoms), std::move(w), a.dim());
}

std::string DiscreteMeasure::describe_atom(std::size_t i) const {
    std::ostringstream os;
    os.precision(17);
    os << "atom " << i << " at (";
    for (std::size_t k = 0; k < dim_; ++k) os << (k ? ", " : "") << atoms_[i * dim_ + k];
    os << ")";
    return os.str();
}

namespace detail {

double integrate_values(const DiscreteMeasure& m, const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i]))
            throw DomainError("integrand is not finite at " + m.describe_atom(i));
    }
    return kernels::dot(m.weights(), values);
}

}  // namespace detail

double second_moment(const DiscreteMeasure& m) {
    return integrate(m, [](std::span<const double> p) {
        double s = 0.0;
        for (double c : p) s += c * c;
        return s;
    });
}

std::vector<double> mean(const DiscreteMeasure& m) {
    std::vector<double> out(m.dim(), 0.0);
    for (std::size_t k = 0; k < m.dim(); ++k)
        out[k] = integrate(m, [k](std::span<const double> p) { return p[k]; });
    return out;
}

double wasserstein2_1d(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    if (a.dim() != 1 || b.dim() != 1)
        throw DimensionError("wasserstein2_1d supports one-dimensional measures only");
    auto sorted = [](const DiscreteMeasure& m) {
        std::vector<std::size_t> idx(m.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return m.x(i) < m.x(j); });
        return idx;
    };
    const auto ia = sorted(a);
    const auto ib = sorted(b);
    // Walk both quantile functions; every overlap of mass transports a fixed
    // atom pair.
    std::size_t i = 0, j = 0;
    double ra = a.weight(ia[0]), rb = b.weight(ib[0]);
    double cost = 0.0;
    while (i < ia.size() && j < ib.size()) {
        const double mass = std::min(ra, rb);
        const double d = a.x(ia[i]) - b.x(ib[j]);
        cost += mass * d * d;
        ra -= mass;
        rb -= mass;
        if (ra <= 0.0) {
            if (++i < ia.size()) ra = a.weight(ia[i]);
        }
        if (rb <= 0.0) {
            if (++j < ib.size()) rb = b.weight(ib[j]);
        }
    }
    return std::sqrt(std::max(cost, 0.0));
}

}  // namespace mfg
