#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Data-parallel inner loops shared by the solvers. Each kernel has a scalar
// reference implementation and, on x86-64, an AVX2 variant chosen at runtime.
// Elementwise kernels produce bit-identical results across variants; the
// reductions differ only by summation order.

namespace mfg::kernels {

enum class Isa { scalar, avx2 };

/// Highest instruction set both compiled in and supported by this CPU.
Isa detected_isa();

/// Variant currently used by the dispatching entry points. Defaults to
/// detected_isa(), or to scalar when MFG_FORCE_SCALAR is set in the
/// environment.
Isa active_isa();

/// Force a variant (tests use this to compare implementations). Requesting an
/// unavailable variant falls back to scalar.
void set_isa(Isa isa);

std::string_view isa_name(Isa isa);

struct ArgMin {
    double value;
    std::size_t index;
};

/// sum_i w[i] * v[i]
double dot(std::span<const double> w, std::span<const double> v);

/// sum_i w[i] * a[i] * b[i]
double dot3(std::span<const double> w, std::span<const double> a, std::span<const double> b);

/// out[i] = (x - y[i])^2 * inv_two_t + v[i]; returns the first minimum.
/// An empty input yields {+inf, 0}.
ArgMin hopf_lax_scan(double x, double inv_two_t, std::span<const double> y,
                     std::span<const double> v, std::span<double> out);

/// Composite trapezoid rule on a uniform grid of spacing h.
double trapezoid(double h, std::span<const double> f);

namespace scalar {
double dot(const double* w, const double* v, std::size_t n);
double dot3(const double* w, const double* a, const double* b, std::size_t n);
ArgMin hopf_lax_scan(double x, double inv_two_t, const double* y, const double* v, double* out,
                     std::size_t n);
double trapezoid(double h, const double* f, std::size_t n);
}  // namespace scalar

namespace avx2 {
bool compiled();
double dot(const double* w, const double* v, std::size_t n);
double dot3(const double* w, const double* a, const double* b, std::size_t n);
ArgMin hopf_lax_scan(double x, double inv_two_t, const double* y, const double* v, double* out,
                     std::size_t n);
double trapezoid(double h, const double* f, std::size_t n);
}  // namespace avx2

}  // namespace mfg::kernels
