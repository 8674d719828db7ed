#include "unlearn/dataset.hpp"

#include <cmath>
#include <map>
#include <tuple>
#include <cstring>
#include <numbers>

namespace unlearn {

const char* to_string(Split s) {
  switch (s) {
    case Split::Train:
      return "train";
    case Split::Validation:
      return "validation";
    case Split::Test:
      return "test";
  }
  return "?";
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "validation" || s == "val") return Split::Validation;
  if (s == "test") return Split::Test;
  throw DataError("unknown split tag: '" + s + "'");
}

const char* to_string(SyntheticKind k) {
  switch (k) {
    case SyntheticKind::BiasedGauss:
      return "biased_gauss";
    case SyntheticKind::Symmetric:
      return "symmetric";
    case SyntheticKind::Boundary2d:
      return "boundary2d";
  }
  return "?";
}

SyntheticKind synthetic_kind_from_string(const std::string& s) {
  if (s == "biased_gauss") return SyntheticKind::BiasedGauss;
  if (s == "symmetric") return SyntheticKind::Symmetric;
  if (s == "boundary2d") return SyntheticKind::Boundary2d;
  throw DataError("unknown synthetic kind: '" + s + "'");
}

Sample Dataset::sample(Index i) const {
  return Sample{Eigen::Map<const Vector>(features.row(i).data(), dim()),
                labels[i], sensitive[i]};
}

std::vector<Index> Dataset::rows(Split s) const {
  std::vector<Index> out;
  for (Index i = 0; i < n(); ++i)
    if (split[i] == s) out.push_back(i);
  return out;
}

Index Dataset::count(Split s) const {
  Index c = 0;
  for (Index i = 0; i < n(); ++i)
    if (split[i] == s) ++c;
  return c;
}

void Dataset::validate() const {
  const Index m = n();
  if (m == 0) throw DataError("dataset is empty");
  if (labels.size() != m || sensitive.size() != m ||
      static_cast<Index>(split.size()) != m)
    throw DataError("dataset column lengths disagree");
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < dim(); ++j)
      if (!std::isfinite(features(i, j)))
        throw DataError("non-finite feature at row " + std::to_string(i) +
                        ", column " + std::to_string(j));
    if (labels[i] != 0.0 && labels[i] != 1.0)
      throw DataError("non-binary label at row " + std::to_string(i));
    if (sensitive[i] != 0.0 && sensitive[i] != 1.0)
      throw DataError("non-binary sensitive attribute at row " +
                      std::to_string(i));
  }
  if (count(Split::Train) == 0 || count(Split::Validation) == 0 ||
      count(Split::Test) == 0)
    throw DataError("every split must be nonempty");
}

namespace rng {

double Prng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Prng::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  double u1 = 1.0 - uniform();  // (0, 1]
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * std::numbers::pi * u2;
  cached_normal_ = r * std::sin(a);
  has_cached_normal_ = true;
  return r * std::cos(a);
}

uint64_t Prng::below(uint64_t bound) {
  if (bound < 2) return 0;
  const uint64_t limit = (UINT64_MAX / bound) * bound;
  uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return v % bound;
}

void Prng::shuffle(std::vector<Index>& v) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(below(i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace rng

namespace {

struct SplitSizes {
  Index train, val, test;
};

SplitSizes allocate_sizes(Index n, const std::array<double, 3>& ratios) {
  double rsum = ratios[0] + ratios[1] + ratios[2];
  if (!(ratios[0] > 0 && ratios[1] > 0 && ratios[2] > 0))
    throw DataError("split ratios must be positive");
  if (std::abs(rsum - 1.0) > 1e-9)
    throw DataError("split ratios must sum to 1");
  std::array<Index, 3> c{};
  std::array<double, 3> frac{};
  Index assigned = 0;
  for (int k = 0; k < 3; ++k) {
    double exact = static_cast<double>(n) * ratios[k];
    c[k] = static_cast<Index>(std::floor(exact));
    frac[k] = exact - static_cast<double>(c[k]);
    assigned += c[k];
  }
  // Largest remainder first; earlier split on ties.
  for (Index left = n - assigned; left > 0; --left) {
    int best = 0;
    for (int k = 1; k < 3; ++k)
      if (frac[k] > frac[best]) best = k;
    ++c[best];
    frac[best] = -1.0;
  }
  if (c[0] == 0 || c[1] == 0 || c[2] == 0)
    throw DataError("split ratios leave an empty split for n=" +
                    std::to_string(n));
  return {c[0], c[1], c[2]};
}

std::vector<Split> assign_splits(Index n, const std::array<double, 3>& ratios,
                                 uint64_t seed) {
  SplitSizes sz = allocate_sizes(n, ratios);
  std::vector<Index> order(n);
  for (Index i = 0; i < n; ++i) order[i] = i;
  rng::Prng prng(seed);
  prng.shuffle(order);
  std::vector<Split> tags(n);
  for (Index p = 0; p < n; ++p) {
    Split s = p < sz.train                ? Split::Train
              : p < sz.train + sz.val     ? Split::Validation
                                          : Split::Test;
    tags[order[p]] = s;
  }
  return tags;
}

constexpr std::array<double, 3> kDefaultRatios = {4.0 / 6, 1.0 / 6, 1.0 / 6};

// Gaussian classes on the first d-1 coordinates plus a group-marker
// coordinate: group 1 sits at +a, group 0 at -a, and a far-marker cohort
// sits `tail` further out carrying group-skewed labels. That cohort is what
// couples the marker coefficient to the labels (the bias), concentrates the
// per-sample fairness influence, and makes blanket removal overshoot the gap
// into reverse bias.
Dataset make_biased_gauss(Index n, Index d, double bias, uint64_t seed) {
  rng::Prng prng(seed);
  Dataset ds;
  ds.features.resize(n, d);
  ds.labels.resize(n);
  ds.sensitive.resize(n);
  const double rsd = 1.0 / std::sqrt(static_cast<double>(d));  // per-coordinate scale
  const double mu = 1.0 * rsd;        // base class separation per coordinate
  const double marker = 0.6 * bias;   // group separation on the marker
  const double far = 3.0;             // far-marker offset
  const double deep = 3.0 * rsd;      // how far cohort class features sit
  const double q_up = std::min(0.20, 0.18 * bias);
  const double q_down = 0.55 * q_up;

  const Index mk = d - 1;
  // Exact quotas everywhere: Bernoulli draws would let the cohort asymmetry
  // and the group base rates (and with them the trained group gap) wander
  // across seeds.
  const Index n_up = static_cast<Index>(std::llround(q_up * n));
  const Index n_down = static_cast<Index>(std::llround(q_down * n));
  std::vector<Index> order(n);
  for (Index i = 0; i < n; ++i) order[i] = i;
  prng.shuffle(order);
  std::vector<int8_t> kind(n, 0);
  for (Index p = 0; p < n_up; ++p) kind[order[p]] = 1;
  for (Index p = n_up; p < n_up + n_down; ++p) kind[order[p]] = 2;

  // Base rows: exact group halves and exact label halves within each group,
  // so the base carries no group-label coupling of its own.
  std::vector<Index> base;
  for (Index i = 0; i < n; ++i)
    if (kind[i] == 0) base.push_back(i);
  prng.shuffle(base);
  const Index nb = static_cast<Index>(base.size());
  const Index nb1 = nb / 2;
  std::vector<double> row_g(n), row_y(n);
  for (Index p = 0; p < nb; ++p) {
    row_g[base[p]] = p < nb1 ? 1.0 : 0.0;
    Index q = p < nb1 ? p : p - nb1;
    row_y[base[p]] = q % 2 == 0 ? 1.0 : 0.0;
  }

  // Both far cohorts belong to group 1 and share the far-marker region, so
  // the model calibrates their predictions to the cohort label ratio
  // 1/(1+rho); that surplus over 1/2 is what lifts the group-1 mean and
  // sets the trained gap. Removing the positive cohort collapses the far
  // region toward all-negative and swings the gap far past zero.
  for (Index i = 0; i < n; ++i) {
    double g, y, cls, mk_pos;
    if (kind[i] == 1) {
      // Far-marker positives with class features deep on the negative side:
      // permanently under-predicted, large-residual, the removal target.
      g = 1.0;
      y = 1.0;
      cls = -deep;
      mk_pos = far;
    } else if (kind[i] == 2) {
      // The opposing cohort: negative labels on positive-looking class
      // features in the same far-marker region.
      g = 1.0;
      y = 0.0;
      cls = deep;
      mk_pos = far;
    } else {
      g = row_g[i];
      y = row_y[i];
      cls = y > 0.5 ? mu : -mu;
      mk_pos = (2.0 * g - 1.0) * marker;
    }
    for (Index j = 0; j < mk; ++j) ds.features(i, j) = cls + prng.normal();
    ds.features(i, mk) = mk_pos + prng.normal();
    ds.labels[i] = y;
    ds.sensitive[i] = g;
  }
  // Stratify the split by (cohort, group, label) cell so every split sees
  // nearly the same composition; the trained group gap then barely moves
  // across seeds. A continuous 4:1:1 pattern over the cell-ordered rows
  // keeps the global split sizes exact (up to the n % 6 tail) while staying
  // within one row of proportional inside each cell.
  {
    rng::Prng sprng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::map<std::tuple<int, int, int>, std::vector<Index>> cells;
    for (Index i = 0; i < n; ++i)
      cells[{kind[i], static_cast<int>(ds.sensitive[i]),
             static_cast<int>(ds.labels[i])}]
          .push_back(i);
    ds.split.assign(static_cast<std::size_t>(n), Split::Train);
    Index pos = 0;
    for (auto& [key, rows] : cells) {
      sprng.shuffle(rows);
      for (Index r : rows) {
        Split s = (pos % 6 == 4)   ? Split::Validation
                  : (pos % 6 == 5) ? Split::Test
                                   : Split::Train;
        ds.split[static_cast<std::size_t>(r)] = s;
        ++pos;
      }
    }
  }
  ds.source = "synthetic:biased_gauss";
  ds.seed = seed;
  return ds;
}

// Mirrored pairs: each base sample appears once per group, and pairs share a
// split, so group statistics agree exactly within every split.
Dataset make_symmetric(Index n, Index d, uint64_t seed) {
  if (n % 2 != 0)
    throw DataError("symmetric kind needs an even sample count");
  const Index pairs = n / 2;
  rng::Prng prng(seed);
  Dataset ds;
  ds.features.resize(n, d);
  ds.labels.resize(n);
  ds.sensitive.resize(n);
  ds.split.resize(n);
  const double mu = 1.1 / std::sqrt(static_cast<double>(d));
  std::vector<Split> pair_split =
      assign_splits(pairs, kDefaultRatios, seed ^ 0x9e3779b97f4a7c15ULL);
  for (Index p = 0; p < pairs; ++p) {
    double y = prng.uniform() < 0.5 ? 0.0 : 1.0;
    for (Index j = 0; j < d; ++j) {
      double v = (y > 0.5 ? mu : -mu) + prng.normal();
      ds.features(2 * p, j) = v;
      ds.features(2 * p + 1, j) = v;
    }
    ds.labels[2 * p] = y;
    ds.labels[2 * p + 1] = y;
    ds.sensitive[2 * p] = 0.0;
    ds.sensitive[2 * p + 1] = 1.0;
    ds.split[2 * p] = pair_split[p];
    ds.split[2 * p + 1] = pair_split[p];
  }
  ds.source = "synthetic:symmetric";
  ds.seed = seed;
  return ds;
}

// Small 2-d version of biased_gauss for decision-boundary plot data.
Dataset make_boundary2d(Index n, double bias, uint64_t seed) {
  rng::Prng prng(seed);
  Dataset ds;
  ds.features.resize(n, 2);
  ds.labels.resize(n);
  ds.sensitive.resize(n);
  const double mu = 1.3;
  const double shift = 0.6 * bias;
  const double p_noise = std::min(0.45, 0.14 * bias);
  for (Index i = 0; i < n; ++i) {
    double g = prng.uniform() < 0.5 ? 0.0 : 1.0;
    double y = prng.uniform() < 0.5 ? 0.0 : 1.0;
    double cx = (y > 0.5 ? mu : -mu) + g * shift;
    double cy = (y > 0.5 ? 0.6 * mu : -0.6 * mu);
    ds.features(i, 0) = cx + prng.normal();
    ds.features(i, 1) = cy + prng.normal();
    if (prng.uniform() < p_noise) y = g;
    ds.labels[i] = y;
    ds.sensitive[i] = g;
  }
  ds.split = assign_splits(n, kDefaultRatios, seed ^ 0x9e3779b97f4a7c15ULL);
  ds.source = "synthetic:boundary2d";
  ds.seed = seed;
  return ds;
}

}  // namespace

Dataset gen_synthetic(SyntheticKind kind, Index n, Index d,
                      double bias_strength, uint64_t seed) {
  if (n < 12) throw DataError("need n >= 12 for a feasible split");
  if (d < 1) throw DataError("need d >= 1");
  Dataset ds;
  switch (kind) {
    case SyntheticKind::BiasedGauss:
      ds = make_biased_gauss(n, d, bias_strength, seed);
      break;
    case SyntheticKind::Symmetric:
      ds = make_symmetric(n, d, seed);
      break;
    case SyntheticKind::Boundary2d:
      ds = make_boundary2d(n, bias_strength, seed);
      break;
  }
  ds.validate();
  return ds;
}

Dataset split(const Dataset& ds, const std::array<double, 3>& ratios,
              uint64_t seed) {
  Dataset out = ds;
  out.split = assign_splits(ds.n(), ratios, seed);
  out.validate();
  return out;
}

Dataset standardize(const Dataset& ds) {
  std::vector<Index> train = ds.rows(Split::Train);
  if (train.empty()) throw DataError("standardize needs a training split");
  Dataset out = ds;
  const double nt = static_cast<double>(train.size());
  for (Index j = 0; j < ds.dim(); ++j) {
    double mean = 0.0;
    for (Index i : train) mean += ds.features(i, j);
    mean /= nt;
    double var = 0.0;
    for (Index i : train) {
      double dlt = ds.features(i, j) - mean;
      var += dlt * dlt;
    }
    var /= nt;
    if (var <= 0.0) continue;
    double inv_sd = 1.0 / std::sqrt(var);
    for (Index i = 0; i < ds.n(); ++i)
      out.features(i, j) = (ds.features(i, j) - mean) * inv_sd;
  }
  out.source = ds.source + "|standardized";
  return out;
}

}  // namespace unlearn
