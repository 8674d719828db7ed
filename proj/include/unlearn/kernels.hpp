#pragma once

#include <cstddef>

// Data-parallel inner loops shared by the whole library: margin evaluation,
// weighted gradient / Hessian accumulation and compensated reductions over
// the sample axis. Every kernel has a scalar reference implementation; on
// x86-64 an AVX2 variant and on aarch64 a NEON variant are compiled in and
// picked at runtime. All n-length reductions use Neumaier compensation so
// results are summation-order robust; the variants are equivalence-tested
// against the scalar reference.

namespace unlearn::kernels {

enum class Backend { Auto, Scalar, Avx2, Neon };

// Resolves Auto to the best variant the running CPU supports.
Backend active_backend();
const char* backend_name(Backend b);
// Throws std::invalid_argument if the requested variant is unavailable.
void set_backend(Backend b);
bool backend_available(Backend b);

// Compensated sum of x[0..n).
double sum(const double* x, std::size_t n);

// Compensated dot product of a and b.
double dot(const double* a, const double* b, std::size_t n);

// out[i] = dot(X.row(i), v) + b for row-major X (n x d). Plain accumulation:
// d is the small model dimension, not the sample axis.
void margins(const double* X, std::size_t n, std::size_t d, const double* v,
             double b, double* out);

// acc[j] += sum_i w[i] * X(i, j), compensated along the sample axis.
// acc must hold d entries and is overwritten.
void weighted_feature_sum(const double* X, std::size_t n, std::size_t d,
                          const double* w, double* acc);

// H[j*d+k] = sum_i w[i] * X(i,j) * X(i,k), compensated per entry.
// H is dense row-major d x d and is overwritten.
void weighted_outer_accumulate(const double* X, std::size_t n, std::size_t d,
                               const double* w, double* H);

namespace detail {
// Per-variant entry points, exposed for equivalence tests.
struct Ops {
  double (*sum)(const double*, std::size_t);
  double (*dot)(const double*, const double*, std::size_t);
  void (*margins)(const double*, std::size_t, std::size_t, const double*,
                  double, double*);
  void (*weighted_feature_sum)(const double*, std::size_t, std::size_t,
                               const double*, double*);
  void (*weighted_outer_accumulate)(const double*, std::size_t, std::size_t,
                                    const double*, double*);
};
const Ops& ops_for(Backend b);  // throws if unavailable
}  // namespace detail

}  // namespace unlearn::kernels
