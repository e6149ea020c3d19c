#pragma once

#include <cstddef>
#include <cstdint>

// Arithmetic inner loops shared by the solver and the validation stage.
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2 variant selected once at startup via cpuid. The elementwise kernels
// (axpy, multiply) are written without FMA contraction so scalar and AVX2
// produce bit-identical results; the reductions differ only by summation
// order.

namespace echo::kernels {

enum class Backend { scalar, avx2 };

/// Backend chosen for this process. Picks AVX2 when the CPU supports it;
/// the environment variable ECD_KERNELS=scalar forces the reference path.
Backend active_backend();
const char* backend_name();

/// sum_i w[i] * (x*y[i]) / (1 + x*y[i])
double logistic_fraction_sum(double x, const double* y, const double* w, std::size_t n);

/// sum_i w[i] * y[i] / (1 + x*y[i])
double logistic_weight_sum(double x, const double* y, const double* w, std::size_t n);

/// out[i] += a * in[i]
void axpy(double a, const double* in, double* out, std::size_t n);

/// out[i] = a[i] * b[i]
void multiply(const double* a, const double* b, double* out, std::size_t n);

/// sum_i popcount(a[i] & b[i])
std::uint64_t and_popcount(const std::uint64_t* a, const std::uint64_t* b, std::size_t n);

// Reference implementations, always built. The dispatched entry points above
// are equivalence-tested against these.
namespace scalar {
double logistic_fraction_sum(double x, const double* y, const double* w, std::size_t n);
double logistic_weight_sum(double x, const double* y, const double* w, std::size_t n);
void axpy(double a, const double* in, double* out, std::size_t n);
void multiply(const double* a, const double* b, double* out, std::size_t n);
std::uint64_t and_popcount(const std::uint64_t* a, const std::uint64_t* b, std::size_t n);
}  // namespace scalar

#if (defined(__x86_64__) || defined(_M_X64)) && !defined(ECD_DISABLE_AVX2)
#define ECD_HAVE_AVX2_KERNELS 1
namespace avx2 {
bool supported();
double logistic_fraction_sum(double x, const double* y, const double* w, std::size_t n);
double logistic_weight_sum(double x, const double* y, const double* w, std::size_t n);
void axpy(double a, const double* in, double* out, std::size_t n);
void multiply(const double* a, const double* b, double* out, std::size_t n);
std::uint64_t and_popcount(const std::uint64_t* a, const std::uint64_t* b, std::size_t n);
}  // namespace avx2
#endif

}  // namespace echo::kernels
