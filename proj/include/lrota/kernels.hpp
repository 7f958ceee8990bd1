#pragma once

#include <cstddef>

// Dense vector kernels behind runtime dispatch. A scalar reference
// implementation always exists; an AVX2+FMA variant is selected at startup
// when the CPU supports it. The active backend can be forced for
// equivalence testing, either through set_backend() or by setting the
// environment variable LROTA_SIMD to "scalar" or "avx2" before first use.

namespace lrota::kernels {

enum class Backend { scalar, avx2 };

// True when the running CPU reports AVX2 and FMA.
bool avx2_available();

// Backend used by the free functions below.
Backend active_backend();

// Force a backend. Requesting avx2 on unsupported hardware throws.
void set_backend(Backend b);

// sum_i a[i] * b[i]
double dot(const double* a, const double* b, std::size_t n);

// y[i] += alpha * x[i]
void axpy(double alpha, const double* x, double* y, std::size_t n);

// x[i] *= alpha
void scal(double alpha, double* x, std::size_t n);

namespace detail {
double dot_scalar(const double* a, const double* b, std::size_t n);
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n);
void scal_scalar(double alpha, double* x, std::size_t n);
double dot_avx2(const double* a, const double* b, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
void scal_avx2(double alpha, double* x, std::size_t n);
}  // namespace detail

}  // namespace lrota::kernels
