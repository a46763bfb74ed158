#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <type_traits>
#include <utility>
#include <vector>

#include "mfg/error.hpp"
#include "mfg/measure.hpp"

namespace mfg {

/// Finite probability space with strictly positive weights. Random variables
/// are coupled only if they share the same space object.
class SampleSpace {
public:
    static std::shared_ptr<const SampleSpace> make(std::vector<double> weights);
    static std::shared_ptr<const SampleSpace> uniform(std::size_t n);
    /// Omega_a x Omega_b with product weights; outcome (i, j) has index i*|b| + j.
    static std::shared_ptr<const SampleSpace> product(const SampleSpace& a, const SampleSpace& b);

    std::size_t size() const { return weights_.size(); }
    const std::vector<double>& weights() const { return weights_; }

private:
    explicit SampleSpace(std::vector<double> weights) : weights_(std::move(weights)) {}
    std::vector<double> weights_;
};

using SpacePtr = std::shared_ptr<const SampleSpace>;

/// R^d-valued random variable on a finite sample space; values are stored flat
/// per outcome, like DiscreteMeasure atoms.
class RandomVariable {
public:
    RandomVariable(SpacePtr space, std::vector<double> values, std::size_t dim = 1);

    const SpacePtr& space() const { return space_; }
    std::size_t size() const { return space_->size(); }
    std::size_t dim() const { return dim_; }
    std::span<const double> at(std::size_t w) const { return {values_.data() + w * dim_, dim_}; }
    double value(std::size_t w) const { return values_[w * dim_]; }
    const std::vector<double>& values() const { return values_; }

    /// a*X + b*Y on the common space.
    static RandomVariable combine(double a, const RandomVariable& x, double b, const RandomVariable& y);

private:
    SpacePtr space_;
    std::vector<double> values_;
    std::size_t dim_;
};

void require_same_space(const RandomVariable& x, const RandomVariable& y);

/// Law of X; one atom per outcome, not merged.
DiscreteMeasure law(const RandomVariable& x);

/// E[f(X)] for a scalar f taking double (d = 1) or std::span<const double>.
template <class F>
double expect(const RandomVariable& x, F&& f) {
    return integrate(law(x), std::forward<F>(f));
}

double expect(const RandomVariable& x);

/// E[<X, Y>].
double inner(const RandomVariable& x, const RandomVariable& y);

/// f(X) as a random variable on the same space.
template <class F>
RandomVariable map(const RandomVariable& x, F&& f) {
    DiscreteMeasure image = pushforward(law(x), std::forward<F>(f));
    return RandomVariable(x.space(), image.atoms(), image.dim());
}

/// Independent copies: (X o pr_1, Y o pr_2) on the product space. Used for
/// the X~ terms of second-order monotonicity forms.
std::pair<RandomVariable, RandomVariable> independent_pair(const RandomVariable& x, const RandomVariable& y);

}  // namespace mfg
