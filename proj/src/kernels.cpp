#include "lrota/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "lrota/errors.hpp"

namespace lrota::kernels {

namespace detail {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scal_scalar(double alpha, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

}  // namespace detail

namespace {

struct Table {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scal)(double, double*, std::size_t);
};

constexpr Table kScalar{detail::dot_scalar, detail::axpy_scalar, detail::scal_scalar};

Table table_for(Backend b) {
  if (b == Backend::avx2) return Table{detail::dot_avx2, detail::axpy_avx2, detail::scal_avx2};
  return kScalar;
}

Backend g_backend = Backend::scalar;
Table g_table = kScalar;

Backend pick_default() {
  if (const char* env = std::getenv("LROTA_SIMD")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
    if (std::strcmp(env, "avx2") == 0 && avx2_available()) return Backend::avx2;
    if (std::strcmp(env, "avx2") == 0) return Backend::scalar;  // unsupported, fall back
  }
  return avx2_available() ? Backend::avx2 : Backend::scalar;
}

void ensure_init() {
  static const bool done = [] {
    g_backend = pick_default();
    g_table = table_for(g_backend);
    return true;
  }();
  (void)done;
}

}  // namespace

bool avx2_available() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend active_backend() {
  ensure_init();
  return g_backend;
}

void set_backend(Backend b) {
  ensure_init();
  if (b == Backend::avx2 && !avx2_available())
    throw ConfigError("avx2 backend requested but the CPU does not support AVX2+FMA");
  g_backend = b;
  g_table = table_for(b);
}

double dot(const double* a, const double* b, std::size_t n) {
  ensure_init();
  return g_table.dot(a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  ensure_init();
  g_table.axpy(alpha, x, y, n);
}

void scal(double alpha, double* x, std::size_t n) {
  ensure_init();
  g_table.scal(alpha, x, n);
}

}  // namespace lrota::kernels
