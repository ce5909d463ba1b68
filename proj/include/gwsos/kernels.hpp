#pragma once

#include <cstddef>

// Dense vector kernels with a scalar reference and an AVX2+FMA variant.
// The variant is picked once at first use from the running CPU.
namespace gwsos::kernels {

enum class Isa { scalar, avx2 };

Isa active_isa();
const char* isa_name(Isa isa);
bool isa_available(Isa isa);
// Test hook; returns false if the requested variant is not usable here.
bool force_isa(Isa isa);

double dot(const double* a, const double* b, std::size_t n);
// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);
// x^T C x for a row-major n x n matrix C.
double quadratic_form(const double* C, const double* x, std::size_t n);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double quadratic_form(const double* C, const double* x, std::size_t n);
}  // namespace scalar

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double quadratic_form(const double* C, const double* x, std::size_t n);
}  // namespace avx2

}  // namespace gwsos::kernels
