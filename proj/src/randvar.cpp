#include "mfg/randvar.hpp"

#include <cmath>
#include <numeric>

#include "mfg/kernels.hpp"

namespace mfg {

SpacePtr SampleSpace::make(std::vector<double> weights) {
    if (weights.empty()) throw DomainError("sample space needs at least one outcome");
    for (std::size_t i = 0; i < weights.size(); ++i)
        if (!(weights[i] > 0.0) || !std::isfinite(weights[i]))
            throw DomainError("outcome " + std::to_string(i) + " has non-positive weight");
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (std::abs(total - 1.0) > kWeightSumTol) throw DomainError("outcome weights do not sum to 1");
    return SpacePtr(new SampleSpace(std::move(weights)));
}

SpacePtr SampleSpace::uniform(std::size_t n) {
    if (n == 0) throw DomainError("sample space needs at least one outcome");
    return make(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

SpacePtr SampleSpace::product(const SampleSpace& a, const SampleSpace& b) {
    std::vector<double> w;
    w.reserve(a.size() * b.size());
    for (double wa : a.weights())
        for (double wb : b.weights()) w.push_back(wa * wb);
    // Products of weights summing to one sum to one only up to rounding.
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    if (std::abs(total - 1.0) > kWeightSumTol) throw DomainError("product weights do not sum to 1");
    return SpacePtr(new SampleSpace(std::move(w)));
}

RandomVariable::RandomVariable(SpacePtr space, std::vector<double> values, std::size_t dim)
    : space_(std::move(space)), values_(std::move(values)), dim_(dim) {
    if (!space_) throw DomainError("random variable needs a sample space");
    if (dim_ == 0) throw DimensionError("random variable dimension must be positive");
    if (values_.size() != space_->size() * dim_)
        throw DimensionError("value storage does not match outcome count times dimension");
    for (double v : values_)
        if (!std::isfinite(v)) throw DomainError("random variable values must be finite");
}

RandomVariable RandomVariable::combine(double a, const RandomVariable& x, double b, const RandomVariable& y) {
    require_same_space(x, y);
    if (x.dim() != y.dim()) throw DimensionError("combining random variables of different dimension");
    std::vector<double> v(x.values().size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a * x.values()[i] + b * y.values()[i];
    return RandomVariable(x.space(), std::move(v), x.dim());
}

void require_same_space(const RandomVariable& x, const RandomVariable& y) {
    if (x.space() != y.space())
        throw CouplingError("random variables live on different sample spaces; build a coupling first");
}

DiscreteMeasure law(const RandomVariable& x) {
    return DiscreteMeasure(x.values(), x.space()->weights(), x.dim());
}

double expect(const RandomVariable& x) {
    if (x.dim() != 1) throw DimensionError("scalar expectation of a vector random variable");
    return kernels::dot(x.space()->weights(), x.values());
}

double inner(const RandomVariable& x, const RandomVariable& y) {
    require_same_space(x, y);
    if (x.dim() != y.dim()) throw DimensionError("inner product of random variables of different dimension");
    const auto& w = x.space()->weights();
    if (x.dim() == 1) return kernels::dot3(w, x.values(), y.values());
    double s = 0.0;
    for (std::size_t o = 0; o < x.size(); ++o) {
        double p = 0.0;
        for (std::size_t k = 0; k < x.dim(); ++k) p += x.at(o)[k] * y.at(o)[k];
        s += w[o] * p;
    }
    return s;
}

std::pair<RandomVariable, RandomVariable> independent_pair(const RandomVariable& x, const RandomVariable& y) {
    SpacePtr prod = SampleSpace::product(*x.space(), *y.space());
    std::vector<double> vx, vy;
    vx.reserve(prod->size() * x.dim());
    vy.reserve(prod->size() * y.dim());
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = 0; j < y.size(); ++j) {
            vx.insert(vx.end(), x.at(i).begin(), x.at(i).end());
            vy.insert(vy.end(), y.at(j).begin(), y.at(j).end());
        }
    }
    return {RandomVariable(prod, std::move(vx), x.dim()), RandomVariable(prod, std::move(vy), y.dim())};
}

}  // namespace mfg
