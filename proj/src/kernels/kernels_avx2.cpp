// AVX2 kernel variants. This translation unit is compiled with -mavx2
// -mpopcnt and must only be entered after avx2::supported() returned true.

#include "echo/kernels.hpp"

#ifdef ECD_HAVE_AVX2_KERNELS

#include <immintrin.h>

namespace echo::kernels::avx2 {

bool supported() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("popcnt");
}

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

}  // namespace

double logistic_fraction_sum(double x, const double* y, const double* w, std::size_t n) {
    const __m256d xv = _mm256_set1_pd(x);
    const __m256d one = _mm256_set1_pd(1.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d xy = _mm256_mul_pd(xv, _mm256_loadu_pd(y + i));
        const __m256d frac = _mm256_div_pd(xy, _mm256_add_pd(one, xy));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(w + i), frac));
    }
    double total = hsum(acc);
    for (; i < n; ++i) {
        const double xy = x * y[i];
        total += w[i] * (xy / (1.0 + xy));
    }
    return total;
}

double logistic_weight_sum(double x, const double* y, const double* w, std::size_t n) {
    const __m256d xv = _mm256_set1_pd(x);
    const __m256d one = _mm256_set1_pd(1.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d yv = _mm256_loadu_pd(y + i);
        const __m256d denom = _mm256_add_pd(one, _mm256_mul_pd(xv, yv));
        const __m256d frac = _mm256_div_pd(yv, denom);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(w + i), frac));
    }
    double total = hsum(acc);
    for (; i < n; ++i) {
        total += w[i] * (y[i] / (1.0 + x * y[i]));
    }
    return total;
}

void axpy(double a, const double* in, double* out, std::size_t n) {
    const __m256d av = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d prod = _mm256_mul_pd(av, _mm256_loadu_pd(in + i));
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(out + i), prod));
    }
    for (; i < n; ++i) {
        out[i] += a * in[i];
    }
}

void multiply(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) {
        out[i] = a[i] * b[i];
    }
}

std::uint64_t and_popcount(const std::uint64_t* a, const std::uint64_t* b, std::size_t n) {
    std::uint64_t acc = 0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256i av = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
        const __m256i bv = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
        const __m256i both = _mm256_and_si256(av, bv);
        acc += static_cast<std::uint64_t>(_mm_popcnt_u64(static_cast<std::uint64_t>(_mm256_extract_epi64(both, 0))));
        acc += static_cast<std::uint64_t>(_mm_popcnt_u64(static_cast<std::uint64_t>(_mm256_extract_epi64(both, 1))));
        acc += static_cast<std::uint64_t>(_mm_popcnt_u64(static_cast<std::uint64_t>(_mm256_extract_epi64(both, 2))));
        acc += static_cast<std::uint64_t>(_mm_popcnt_u64(static_cast<std::uint64_t>(_mm256_extract_epi64(both, 3))));
    }
    for (; i < n; ++i) {
        acc += static_cast<std::uint64_t>(_mm_popcnt_u64(a[i] & b[i]));
    }
    return acc;
}

}  // namespace echo::kernels::avx2

#endif  // ECD_HAVE_AVX2_KERNELS
