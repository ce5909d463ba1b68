#include "gwsos/kernels.hpp"

#include <atomic>

namespace gwsos::kernels {

namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double quadratic_form(const double* C, const double* x, std::size_t n) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * dot(C + i * n, x, n);
    return s;
}

}  // namespace scalar

namespace {

bool cpu_has_avx2() {
#if defined(GWSOS_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

std::atomic<Isa>& current() {
    static std::atomic<Isa> isa{cpu_has_avx2() ? Isa::avx2 : Isa::scalar};
    return isa;
}

}  // namespace

Isa active_isa() { return current().load(std::memory_order_relaxed); }

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) { return isa == Isa::scalar || cpu_has_avx2(); }

bool force_isa(Isa isa) {
    if (!isa_available(isa)) return false;
    current().store(isa, std::memory_order_relaxed);
    return true;
}

double dot(const double* a, const double* b, std::size_t n) {
#ifdef GWSOS_HAVE_AVX2
    if (active_isa() == Isa::avx2) return avx2::dot(a, b, n);
#endif
    return scalar::dot(a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
#ifdef GWSOS_HAVE_AVX2
    if (active_isa() == Isa::avx2) return avx2::axpy(alpha, x, y, n);
#endif
    scalar::axpy(alpha, x, y, n);
}

double quadratic_form(const double* C, const double* x, std::size_t n) {
#ifdef GWSOS_HAVE_AVX2
    if (active_isa() == Isa::avx2) return avx2::quadratic_form(C, x, n);
#endif
    return scalar::quadratic_form(C, x, n);
}

}  // namespace gwsos::kernels
