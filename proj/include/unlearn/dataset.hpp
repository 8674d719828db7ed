#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "unlearn/types.hpp"

namespace unlearn {

enum class Split : uint8_t { Train, Validation, Test };
const char* to_string(Split s);
Split split_from_string(const std::string& s);

enum class SyntheticKind { BiasedGauss, Symmetric, Boundary2d };
const char* to_string(SyntheticKind k);
SyntheticKind synthetic_kind_from_string(const std::string& s);

// Tabular dataset with binary labels and a binary sensitive attribute.
// Splits are part of the dataset: disjoint, exhaustive, nonempty.
struct Dataset {
  RowMatrix features;           // n x d
  Vector labels;                // 0/1
  Vector sensitive;             // 0/1
  std::vector<Split> split;     // one tag per row
  std::string source;           // provenance descriptor
  uint64_t seed = 0;

  Index n() const { return features.rows(); }
  Index dim() const { return features.cols(); }
  Sample sample(Index i) const;
  std::vector<Index> rows(Split s) const;
  Index count(Split s) const;
  void validate() const;  // throws DataError on broken invariants
};

// Deterministic generator: identical (kind, n, d, bias_strength, seed) yields
// identical datasets on every platform. All randomness is drawn from
// mt19937_64 through fixed arithmetic (no distribution objects). Splits are
// assigned here with the default 4:1:1 ratios; re-split with split() if
// different ratios are needed (note that re-splitting a `symmetric` dataset
// may separate its mirrored pairs and leave a small nonzero parity gap).
Dataset gen_synthetic(SyntheticKind kind, Index n, Index d,
                      double bias_strength, uint64_t seed);

// Deterministic shuffled re-assignment of split tags. Ratios must be positive
// and sum to 1 within 1e-9. Sizes use floor allocation with the remainder
// going to the splits of largest fractional part (earlier split on ties).
Dataset split(const Dataset& ds, const std::array<double, 3>& ratios,
              uint64_t seed);

// Per-feature z-scoring with statistics from the training split only.
// Features with zero variance are left untouched.
Dataset standardize(const Dataset& ds);

namespace rng {
// Thin deterministic layer over std::mt19937_64 (whose output sequence the
// standard pins down): uniform doubles come from the top 53 bits, normals
// from Box-Muller, shuffles from Fisher-Yates with rejection sampling.
// Standard-library distributions are avoided on purpose (their output is
// implementation-defined).
class Prng {
 public:
  explicit Prng(uint64_t seed) : eng_(seed) {}
  uint64_t next_u64() { return eng_(); }
  double uniform();                // [0, 1)
  double normal();                 // standard normal
  uint64_t below(uint64_t bound);  // unbiased [0, bound)
  void shuffle(std::vector<Index>& v);

 private:
  std::mt19937_64 eng_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};
}  // namespace rng

}  // namespace unlearn
