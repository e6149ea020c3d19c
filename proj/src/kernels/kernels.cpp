#include "echo/kernels.hpp"

#include <bit>
#include <cstdlib>
#include <cstring>

namespace echo::kernels {

namespace scalar {

double logistic_fraction_sum(double x, const double* y, const double* w, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double xy = x * y[i];
        acc += w[i] * (xy / (1.0 + xy));
    }
    return acc;
}

double logistic_weight_sum(double x, const double* y, const double* w, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += w[i] * (y[i] / (1.0 + x * y[i]));
    }
    return acc;
}

void axpy(double a, const double* in, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] += a * in[i];
    }
}

void multiply(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = a[i] * b[i];
    }
}

std::uint64_t and_popcount(const std::uint64_t* a, const std::uint64_t* b, std::size_t n) {
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += static_cast<std::uint64_t>(std::popcount(a[i] & b[i]));
    }
    return acc;
}

}  // namespace scalar

namespace {

struct Dispatch {
    Backend backend;
    double (*logistic_fraction_sum)(double, const double*, const double*, std::size_t);
    double (*logistic_weight_sum)(double, const double*, const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    void (*multiply)(const double*, const double*, double*, std::size_t);
    std::uint64_t (*and_popcount)(const std::uint64_t*, const std::uint64_t*, std::size_t);
};

Dispatch select() {
    Dispatch d{Backend::scalar,
               &scalar::logistic_fraction_sum,
               &scalar::logistic_weight_sum,
               &scalar::axpy,
               &scalar::multiply,
               &scalar::and_popcount};
    const char* forced = std::getenv("ECD_KERNELS");
    if (forced != nullptr && std::strcmp(forced, "scalar") == 0) {
        return d;
    }
#ifdef ECD_HAVE_AVX2_KERNELS
    if (avx2::supported()) {
        d = Dispatch{Backend::avx2,
                     &avx2::logistic_fraction_sum,
                     &avx2::logistic_weight_sum,
                     &avx2::axpy,
                     &avx2::multiply,
                     &avx2::and_popcount};
    }
#endif
    return d;
}

const Dispatch& table() {
    static const Dispatch d = select();
    return d;
}

}  // namespace

Backend active_backend() { return table().backend; }

const char* backend_name() {
    return table().backend == Backend::avx2 ? "avx2" : "scalar";
}

double logistic_fraction_sum(double x, const double* y, const double* w, std::size_t n) {
    return table().logistic_fraction_sum(x, y, w, n);
}

double logistic_weight_sum(double x, const double* y, const double* w, std::size_t n) {
    return table().logistic_weight_sum(x, y, w, n);
}

void axpy(double a, const double* in, double* out, std::size_t n) {
    table().axpy(a, in, out, n);
}

void multiply(const double* a, const double* b, double* out, std::size_t n) {
    table().multiply(a, b, out, n);
}

std::uint64_t and_popcount(const std::uint64_t* a, const std::uint64_t* b, std::size_t n) {
    return table().and_popcount(a, b, n);
}

}  // namespace echo::kernels
