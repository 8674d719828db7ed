// NEON variants of the sample-axis kernels, compiled on aarch64 only.
// float64x2_t carries two lanes; the structure mirrors the AVX2 file.

#include <arm_neon.h>

#include <cmath>
#include <cstddef>
#include <vector>

#include "unlearn/kernels.hpp"

namespace unlearn::kernels::detail {

namespace {

inline void neumaier_step(double& s, double& c, double x) {
  double t = s + x;
  c += (std::abs(s) >= std::abs(x)) ? (s - t) + x : (x - t) + s;
  s = t;
}

// Two-lane Neumaier accumulator.
struct Accum2 {
  float64x2_t s = vdupq_n_f64(0.0);
  float64x2_t c = vdupq_n_f64(0.0);
  inline void add(float64x2_t x) {
    float64x2_t t = vaddq_f64(s, x);
    uint64x2_t big_s = vcgeq_f64(vabsq_f64(s), vabsq_f64(x));
    float64x2_t e_s = vaddq_f64(vsubq_f64(s, t), x);
    float64x2_t e_x = vaddq_f64(vsubq_f64(x, t), s);
    c = vaddq_f64(c, vbslq_f64(big_s, e_s, e_x));
    s = t;
  }
  inline double value() const {
    double sv[2], cv[2];
    vst1q_f64(sv, s);
    vst1q_f64(cv, c);
    double rs = 0.0, rc = 0.0;
    for (double v : sv) neumaier_step(rs, rc, v);
    for (double v : cv) neumaier_step(rs, rc, v);
    return rs + rc;
  }
};

double sum_neon(const double* x, std::size_t n) {
  Accum2 a;
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) a.add(vld1q_f64(x + i));
  double s = a.value(), c = 0.0;
  for (; i < n; ++i) neumaier_step(s, c, x[i]);
  return s + c;
}

double dot_neon(const double* a, const double* b, std::size_t n) {
  Accum2 acc;
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    acc.add(vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  double s = acc.value(), c = 0.0;
  for (; i < n; ++i) neumaier_step(s, c, a[i] * b[i]);
  return s + c;
}

void margins_neon(const double* X, std::size_t n, std::size_t d,
                  const double* v, double b, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = X + i * d;
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t j = 0;
    for (; j + 2 <= d; j += 2)
      acc = vfmaq_f64(acc, vld1q_f64(row + j), vld1q_f64(v + j));
    double m = b + vaddvq_f64(acc);
    for (; j < d; ++j) m += row[j] * v[j];
    out[i] = m;
  }
}

inline void neumaier_step2(double* s, double* c, float64x2_t x) {
  float64x2_t sv = vld1q_f64(s);
  float64x2_t cv = vld1q_f64(c);
  float64x2_t t = vaddq_f64(sv, x);
  uint64x2_t big_s = vcgeq_f64(vabsq_f64(sv), vabsq_f64(x));
  float64x2_t e_s = vaddq_f64(vsubq_f64(sv, t), x);
  float64x2_t e_x = vaddq_f64(vsubq_f64(x, t), sv);
  cv = vaddq_f64(cv, vbslq_f64(big_s, e_s, e_x));
  vst1q_f64(s, t);
  vst1q_f64(c, cv);
}

void weighted_feature_sum_neon(const double* X, std::size_t n, std::size_t d,
                               const double* w, double* acc) {
  std::vector<double> s(d, 0.0), c(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = w[i];
    const float64x2_t wv = vdupq_n_f64(wi);
    const double* row = X + i * d;
    std::size_t j = 0;
    for (; j + 2 <= d; j += 2)
      neumaier_step2(s.data() + j, c.data() + j, vmulq_f64(wv, vld1q_f64(row + j)));
    for (; j < d; ++j) neumaier_step(s[j], c[j], wi * row[j]);
  }
  for (std::size_t j = 0; j < d; ++j) acc[j] = s[j] + c[j];
}

void weighted_outer_accumulate_neon(const double* X, std::size_t n,
                                    std::size_t d, const double* w,
                                    double* H) {
  std::vector<double> s(d * d, 0.0), c(d * d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = w[i];
    const double* row = X + i * d;
    for (std::size_t j = 0; j < d; ++j) {
      const double wj = wi * row[j];
      const float64x2_t wjv = vdupq_n_f64(wj);
      double* sj = s.data() + j * d;
      double* cj = c.data() + j * d;
      std::size_t k = 0;
      for (; k + 2 <= d; k += 2)
        neumaier_step2(sj + k, cj + k, vmulq_f64(wjv, vld1q_f64(row + k)));
      for (; k < d; ++k) neumaier_step(sj[k], cj[k], wj * row[k]);
    }
  }
  for (std::size_t e = 0; e < d * d; ++e) H[e] = s[e] + c[e];
}

const Ops neon_table = {sum_neon, dot_neon, margins_neon,
                        weighted_feature_sum_neon,
                        weighted_outer_accumulate_neon};

}  // namespace

const Ops& neon_ops() { return neon_table; }

}  // namespace unlearn::kernels::detail
