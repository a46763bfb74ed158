#include "mfg/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>

namespace mfg::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

Isa initial_isa() {
    if (std::getenv("MFG_FORCE_SCALAR") != nullptr) return Isa::scalar;
    return detected_isa();
}

std::atomic<Isa>& current() {
    static std::atomic<Isa> isa{initial_isa()};
    return isa;
}

void require_same_size(std::size_t a, std::size_t b) {
    if (a != b) throw std::invalid_argument("kernel operands differ in length");
}

}  // namespace

Isa detected_isa() { return (avx2::compiled() && cpu_has_avx2()) ? Isa::avx2 : Isa::scalar; }

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
    if (isa == Isa::avx2 && detected_isa() != Isa::avx2) isa = Isa::scalar;
    current().store(isa, std::memory_order_relaxed);
}

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

double dot(std::span<const double> w, std::span<const double> v) {
    require_same_size(w.size(), v.size());
    return active_isa() == Isa::avx2 ? avx2::dot(w.data(), v.data(), w.size())
                                     : scalar::dot(w.data(), v.data(), w.size());
}

double dot3(std::span<const double> w, std::span<const double> a, std::span<const double> b) {
    require_same_size(w.size(), a.size());
    require_same_size(w.size(), b.size());
    return active_isa() == Isa::avx2 ? avx2::dot3(w.data(), a.data(), b.data(), w.size())
                                     : scalar::dot3(w.data(), a.data(), b.data(), w.size());
}

ArgMin hopf_lax_scan(double x, double inv_two_t, std::span<const double> y,
                     std::span<const double> v, std::span<double> out) {
    require_same_size(y.size(), v.size());
    require_same_size(y.size(), out.size());
    return active_isa() == Isa::avx2
               ? avx2::hopf_lax_scan(x, inv_two_t, y.data(), v.data(), out.data(), y.size())
               : scalar::hopf_lax_scan(x, inv_two_t, y.data(), v.data(), out.data(), y.size());
}

double trapezoid(double h, std::span<const double> f) {
    return active_isa() == Isa::avx2 ? avx2::trapezoid(h, f.data(), f.size())
                                     : scalar::trapezoid(h, f.data(), f.size());
}

}  // namespace mfg::kernels
