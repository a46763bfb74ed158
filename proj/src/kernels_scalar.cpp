#include "mfg/kernels.hpp"

#include <limits>

namespace mfg::kernels::scalar {

double dot(const double* w, const double* v, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += w[i] * v[i];
    return s;
}

double dot3(const double* w, const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += w[i] * a[i] * b[i];
    return s;
}

ArgMin hopf_lax_scan(double x, double inv_two_t, const double* y, const double* v, double* out,
                     std::size_t n) {
    ArgMin best{std::numeric_limits<double>::infinity(), 0};
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x - y[i];
        const double o = d * d * inv_two_t + v[i];
        out[i] = o;
        if (o < best.value) best = {o, i};
    }
    return best;
}

double trapezoid(double h, const double* f, std::size_t n) {
    if (n < 2) return 0.0;
    double s = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) s += f[i];
    return h * (s + 0.5 * (f[0] + f[n - 1]));
}

}  // namespace mfg::kernels::scalar
