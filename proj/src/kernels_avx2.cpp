// AVX2 variants of the sample-axis kernels. Compiled only on x86-64 (with
// -mavx2 -mfma) and selected at runtime when the CPU reports AVX2.

#include <immintrin.h>

#include <cmath>
#include <cstddef>
#include <vector>

#include "unlearn/kernels.hpp"

namespace unlearn::kernels::detail {

namespace {

inline __m256d abs_pd(__m256d x) {
  const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  return _mm256_and_pd(x, mask);
}

// Four-lane Neumaier accumulator.
struct Accum4 {
  __m256d s = _mm256_setzero_pd();
  __m256d c = _mm256_setzero_pd();
  inline void add(__m256d x) {
    __m256d t = _mm256_add_pd(s, x);
    __m256d big_s = _mm256_cmp_pd(abs_pd(s), abs_pd(x), _CMP_GE_OQ);
    __m256d e_s = _mm256_add_pd(_mm256_sub_pd(s, t), x);
    __m256d e_x = _mm256_add_pd(_mm256_sub_pd(x, t), s);
    c = _mm256_add_pd(c, _mm256_blendv_pd(e_x, e_s, big_s));
    s = t;
  }
  inline double value() const {
    alignas(32) double sv[4], cv[4];
    _mm256_store_pd(sv, s);
    _mm256_store_pd(cv, c);
    // Fold lanes with the same compensated rule.
    double rs = 0.0, rc = 0.0;
    auto fold = [&](double x) {
      double t = rs + x;
      rc += (std::abs(rs) >= std::abs(x)) ? (rs - t) + x : (x - t) + rs;
      rs = t;
    };
    for (double v : sv) fold(v);
    for (double v : cv) fold(v);
    return rs + rc;
  }
};

inline void neumaier_step(double& s, double& c, double x) {
  double t = s + x;
  c += (std::abs(s) >= std::abs(x)) ? (s - t) + x : (x - t) + s;
  s = t;
}

double sum_avx2(const double* x, std::size_t n) {
  Accum4 a;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) a.add(_mm256_loadu_pd(x + i));
  double s = a.value(), c = 0.0;
  for (; i < n; ++i) neumaier_step(s, c, x[i]);
  return s + c;
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  Accum4 acc;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc.add(_mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  double s = acc.value(), c = 0.0;
  for (; i < n; ++i) neumaier_step(s, c, a[i] * b[i]);
  return s + c;
}

void margins_avx2(const double* X, std::size_t n, std::size_t d,
                  const double* v, double b, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = X + i * d;
    __m256d acc = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= d; j += 4)
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(row + j), _mm256_loadu_pd(v + j), acc);
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double m = b + ((lanes[0] + lanes[1]) + (lanes[2] + lanes[3]));
    for (; j < d; ++j) m += row[j] * v[j];
    out[i] = m;
  }
}

void weighted_feature_sum_avx2(const double* X, std::size_t n, std::size_t d,
                               const double* w, double* acc) {
  std::vector<double> s(d, 0.0), c(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = w[i];
    const __m256d wv = _mm256_set1_pd(wi);
    const double* row = X + i * d;
    std::size_t j = 0;
    for (; j + 4 <= d; j += 4) {
      __m256d x = _mm256_mul_pd(wv, _mm256_loadu_pd(row + j));
      __m256d sv = _mm256_loadu_pd(s.data() + j);
      __m256d cv = _mm256_loadu_pd(c.data() + j);
      __m256d t = _mm256_add_pd(sv, x);
      __m256d big_s = _mm256_cmp_pd(abs_pd(sv), abs_pd(x), _CMP_GE_OQ);
      __m256d e_s = _mm256_add_pd(_mm256_sub_pd(sv, t), x);
      __m256d e_x = _mm256_add_pd(_mm256_sub_pd(x, t), sv);
      cv = _mm256_add_pd(cv, _mm256_blendv_pd(e_x, e_s, big_s));
      _mm256_storeu_pd(s.data() + j, t);
      _mm256_storeu_pd(c.data() + j, cv);
    }
    for (; j < d; ++j) neumaier_step(s[j], c[j], wi * row[j]);
  }
  for (std::size_t j = 0; j < d; ++j) acc[j] = s[j] + c[j];
}

void weighted_outer_accumulate_avx2(const double* X, std::size_t n,
                                    std::size_t d, const double* w,
                                    double* H) {
  std::vector<double> s(d * d, 0.0), c(d * d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = w[i];
    const double* row = X + i * d;
    for (std::size_t j = 0; j < d; ++j) {
      const double wj = wi * row[j];
      const __m256d wjv = _mm256_set1_pd(wj);
      double* sj = s.data() + j * d;
      double* cj = c.data() + j * d;
      std::size_t k = 0;
      for (; k + 4 <= d; k += 4) {
        __m256d x = _mm256_mul_pd(wjv, _mm256_loadu_pd(row + k));
        __m256d sv = _mm256_loadu_pd(sj + k);
        __m256d cv = _mm256_loadu_pd(cj + k);
        __m256d t = _mm256_add_pd(sv, x);
        __m256d big_s = _mm256_cmp_pd(abs_pd(sv), abs_pd(x), _CMP_GE_OQ);
        __m256d e_s = _mm256_add_pd(_mm256_sub_pd(sv, t), x);
        __m256d e_x = _mm256_add_pd(_mm256_sub_pd(x, t), sv);
        cv = _mm256_add_pd(cv, _mm256_blendv_pd(e_x, e_s, big_s));
        _mm256_storeu_pd(sj + k, t);
        _mm256_storeu_pd(cj + k, cv);
      }
      for (; k < d; ++k) neumaier_step(sj[k], cj[k], wj * row[k]);
    }
  }
  for (std::size_t e = 0; e < d * d; ++e) H[e] = s[e] + c[e];
}

const Ops avx2_table = {sum_avx2, dot_avx2, margins_avx2,
                        weighted_feature_sum_avx2,
                        weighted_outer_accumulate_avx2};

}  // namespace

const Ops& avx2_ops() { return avx2_table; }

}  // namespace unlearn::kernels::detail
