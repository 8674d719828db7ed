#include "unlearn/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <vector>

namespace unlearn::kernels {

namespace {

// Neumaier-compensated accumulator.
struct Accum {
  double s = 0.0;
  double c = 0.0;
  inline void add(double x) {
    double t = s + x;
    if (std::abs(s) >= std::abs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }
  inline double value() const { return s + c; }
};

double sum_scalar(const double* x, std::size_t n) {
  Accum a;
  for (std::size_t i = 0; i < n; ++i) a.add(x[i]);
  return a.value();
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  Accum acc;
  for (std::size_t i = 0; i < n; ++i) acc.add(a[i] * b[i]);
  return acc.value();
}

void margins_scalar(const double* X, std::size_t n, std::size_t d,
                    const double* v, double b, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = X + i * d;
    double m = b;
    for (std::size_t j = 0; j < d; ++j) m += row[j] * v[j];
    out[i] = m;
  }
}

void weighted_feature_sum_scalar(const double* X, std::size_t n, std::size_t d,
                                 const double* w, double* acc) {
  std::vector<Accum> a(d);
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = w[i];
    const double* row = X + i * d;
    for (std::size_t j = 0; j < d; ++j) a[j].add(wi * row[j]);
  }
  for (std::size_t j = 0; j < d; ++j) acc[j] = a[j].value();
}

void weighted_outer_accumulate_scalar(const double* X, std::size_t n,
                                      std::size_t d, const double* w,
                                      double* H) {
  std::vector<Accum> a(d * d);
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = w[i];
    const double* row = X + i * d;
    for (std::size_t j = 0; j < d; ++j) {
      const double wj = wi * row[j];
      Accum* aj = a.data() + j * d;
      for (std::size_t k = 0; k < d; ++k) aj[k].add(wj * row[k]);
    }
  }
  for (std::size_t e = 0; e < d * d; ++e) H[e] = a[e].value();
}

const detail::Ops scalar_ops = {
    sum_scalar, dot_scalar, margins_scalar, weighted_feature_sum_scalar,
    weighted_outer_accumulate_scalar};

std::atomic<const detail::Ops*> g_ops{nullptr};
std::atomic<Backend> g_backend{Backend::Auto};

Backend best_backend() {
#if defined(UNLEARN_BUILD_AVX2) && defined(__x86_64__)
  if (__builtin_cpu_supports("avx2")) return Backend::Avx2;
#endif
#if defined(UNLEARN_BUILD_NEON)
  return Backend::Neon;
#endif
  return Backend::Scalar;
}

const detail::Ops* resolve(Backend b) {
  if (b == Backend::Auto) b = best_backend();
  return &detail::ops_for(b);
}

const detail::Ops& ops() {
  const detail::Ops* p = g_ops.load(std::memory_order_acquire);
  if (!p) {
    p = resolve(Backend::Auto);
    g_ops.store(p, std::memory_order_release);
    g_backend.store(best_backend(), std::memory_order_release);
  }
  return *p;
}

}  // namespace

namespace detail {

#if defined(UNLEARN_BUILD_AVX2)
const Ops& avx2_ops();  // kernels_avx2.cpp
#endif
#if defined(UNLEARN_BUILD_NEON)
const Ops& neon_ops();  // kernels_neon.cpp
#endif

const Ops& ops_for(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return scalar_ops;
#if defined(UNLEARN_BUILD_AVX2)
    case Backend::Avx2:
      if (__builtin_cpu_supports("avx2")) return avx2_ops();
      break;
#endif
#if defined(UNLEARN_BUILD_NEON)
    case Backend::Neon:
      return neon_ops();
#endif
    default:
      break;
  }
  throw std::invalid_argument(std::string("kernel backend unavailable: ") +
                              backend_name(b));
}

}  // namespace detail

Backend active_backend() {
  ops();
  return g_backend.load(std::memory_order_acquire);
}

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::Auto:
      return "auto";
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
    case Backend::Neon:
      return "neon";
  }
  return "?";
}

bool backend_available(Backend b) {
  if (b == Backend::Auto || b == Backend::Scalar) return true;
  try {
    (void)detail::ops_for(b);
    return true;
  } catch (const std::invalid_argument&) {
    return false;
  }
}

void set_backend(Backend b) {
  const detail::Ops* p = resolve(b);
  g_ops.store(p, std::memory_order_release);
  g_backend.store(b == Backend::Auto ? best_backend() : b,
                  std::memory_order_release);
}

double sum(const double* x, std::size_t n) { return ops().sum(x, n); }

double dot(const double* a, const double* b, std::size_t n) {
  return ops().dot(a, b, n);
}

void margins(const double* X, std::size_t n, std::size_t d, const double* v,
             double b, double* out) {
  ops().margins(X, n, d, v, b, out);
}

void weighted_feature_sum(const double* X, std::size_t n, std::size_t d,
                          const double* w, double* acc) {
  ops().weighted_feature_sum(X, n, d, w, acc);
}

void weighted_outer_accumulate(const double* X, std::size_t n, std::size_t d,
                               const double* w, double* H) {
  ops().weighted_outer_accumulate(X, n, d, w, H);
}

}  // namespace unlearn::kernels
