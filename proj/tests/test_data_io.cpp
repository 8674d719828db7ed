#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "testutil.hpp"
#include "unlearn/io.hpp"

using namespace unlearn;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("unlearn-test-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int counter;
};
int TempDir::counter = 0;

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p);
  out << s;
}

}  // namespace

TEST_CASE("generator determinism and split integrity") {
  Dataset a = gen_synthetic(SyntheticKind::BiasedGauss, 300, 4, 1.0, 42);
  Dataset b = gen_synthetic(SyntheticKind::BiasedGauss, 300, 4, 1.0, 42);
  CHECK(a.features == b.features);
  CHECK(a.labels == b.labels);
  CHECK(a.split == b.split);
  a.validate();
  CHECK(a.count(Split::Train) + a.count(Split::Validation) +
            a.count(Split::Test) ==
        a.n());
}

TEST_CASE("symmetric datasets train to an exactly fair model") {
  for (uint64_t seed : {1ull, 7ull, 23ull}) {
    Dataset ds = gen_synthetic(SyntheticKind::Symmetric, 240, 3, 1.0, seed);
    TrainConfig cfg;
    ModelParams m = train(ds, cfg, ModelParams::zeros(3));
    for (Split s : {Split::Validation, Split::Test}) {
      double dp = demographic_parity(EvalSet::from(ds, s), m);
      CHECK(dp <= 0.01);   // the stated contract
      CHECK(dp <= 1e-12);  // construction makes it exact
    }
  }
}

TEST_CASE("biased generator produces a measurably unfair model at defaults") {
  Dataset ds = gen_synthetic(SyntheticKind::BiasedGauss, 2000, 5, 1.0, 3);
  TrainConfig cfg;
  ModelParams m = train(ds, cfg, ModelParams::zeros(5));
  CHECK(demographic_parity(EvalSet::from(ds, Split::Test), m) >= 0.05);
}

TEST_CASE("boundary2d forces two dimensions") {
  Dataset ds = gen_synthetic(SyntheticKind::Boundary2d, 120, 7, 1.0, 4);
  CHECK(ds.dim() == 2);
}

TEST_CASE("generator parameter validation") {
  CHECK_THROWS_AS(gen_synthetic(SyntheticKind::BiasedGauss, 6, 2, 1.0, 1),
                  DataError);
  CHECK_THROWS_AS(gen_synthetic(SyntheticKind::Symmetric, 121, 2, 1.0, 1),
                  DataError);
  CHECK_THROWS_AS(gen_synthetic(SyntheticKind::BiasedGauss, 100, 0, 1.0, 1),
                  DataError);
}

TEST_CASE("split sizes follow the largest-remainder rule") {
  Dataset ds = gen_synthetic(SyntheticKind::BiasedGauss, 300, 2, 1.0, 5);
  {
    Dataset nine = gen_synthetic(SyntheticKind::BiasedGauss, 300, 2, 1.0, 6);
    nine.features.conservativeResize(9, Eigen::NoChange);
    nine.labels.conservativeResize(9);
    nine.sensitive.conservativeResize(9);
    nine.split.resize(9);
    Dataset out = split(nine, {1.0 / 3, 1.0 / 3, 1.0 / 3}, 11);
    CHECK(out.count(Split::Train) == 3);
    CHECK(out.count(Split::Validation) == 3);
    CHECK(out.count(Split::Test) == 3);
  }
  {
    Dataset a = split(ds, {4.0 / 6, 1.0 / 6, 1.0 / 6}, 7);
    Dataset b = split(ds, {4.0 / 6, 1.0 / 6, 1.0 / 6}, 7);
    CHECK(a.split == b.split);
  }
  CHECK_THROWS_AS(split(ds, {0.5, 0.5, 0.0}, 1), DataError);
  CHECK_THROWS_AS(split(ds, {0.5, 0.4, 0.2}, 1), DataError);
}

TEST_CASE("Adult-sized split matches the documented counting rule") {
  Dataset big;
  const Index n = 45222;
  big.features = RowMatrix::Zero(n, 1);
  big.labels = Vector::Zero(n);
  for (Index i = 0; i < n; i += 2) big.labels[i] = 1.0;
  big.sensitive = big.labels;
  big.split.assign(static_cast<std::size_t>(n), Split::Train);
  Dataset out = split(big, {4.0 / 6, 1.0 / 6, 1.0 / 6}, 1);
  CHECK(out.count(Split::Train) == 30148);
  CHECK(out.count(Split::Validation) == 7537);
  CHECK(out.count(Split::Test) == 7537);
}

TEST_CASE("standardize uses training-split statistics only") {
  Dataset ds = gen_synthetic(SyntheticKind::BiasedGauss, 120, 3, 1.0, 8);
  Dataset out = standardize(ds);
  std::vector<Index> train = ds.rows(Split::Train);
  for (Index j = 0; j < ds.dim(); ++j) {
    double mean = 0, var = 0;
    for (Index i : train) mean += out.features(i, j);
    mean /= static_cast<double>(train.size());
    for (Index i : train) {
      double d = out.features(i, j) - mean;
      var += d * d;
    }
    var /= static_cast<double>(train.size());
    CHECK(std::abs(mean) <= 1e-10);
    CHECK(var == doctest::Approx(1.0).epsilon(1e-8));
  }
  // zero-variance column passes through untouched
  Dataset flat = ds;
  flat.features.col(0).setConstant(3.0);
  Dataset fout = standardize(flat);
  CHECK((fout.features.col(0).array() == 3.0).all());
}

TEST_CASE("dataset CSV round-trips bit-exactly") {
  TempDir tmp;
  Dataset ds = gen_synthetic(SyntheticKind::BiasedGauss, 90, 3, 1.0, 9);
  fs::path p = tmp.path / "data.csv";
  io::save_dataset_csv(p, ds);
  Dataset back = io::load_dataset_csv(p, {}, {4.0 / 6, 1.0 / 6, 1.0 / 6}, 1);
  CHECK(back.features == ds.features);
  CHECK(back.labels == ds.labels);
  CHECK(back.sensitive == ds.sensitive);
  CHECK(back.split == ds.split);  // split column respected
}

TEST_CASE("CSV loader errors are specific") {
  TempDir tmp;
  fs::path p = tmp.path / "bad.csv";

  write_text(p, "x0,y,g\n1.0,2,0\n");
  try {
    io::load_dataset_csv(p, {}, {0.5, 0.25, 0.25}, 1);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    std::string msg = e.what();
    CHECK(msg.find("row 1") != std::string::npos);
    CHECK(msg.find("'y'") != std::string::npos);
  }

  write_text(p, "x0,g\n1.0,0\n");
  CHECK_THROWS_WITH_AS(io::load_dataset_csv(p, {}, {0.5, 0.25, 0.25}, 1),
                       doctest::Contains("missing label column"), DataError);

  write_text(p, "");
  CHECK_THROWS_AS(io::load_dataset_csv(p, {}, {0.5, 0.25, 0.25}, 1), DataError);

  write_text(p, "x0,y,g\nnan,1,0\n");
  CHECK_THROWS_WITH_AS(io::load_dataset_csv(p, {}, {0.5, 0.25, 0.25}, 1),
                       doctest::Contains("non-finite"), DataError);
}

TEST_CASE("rows without a split column are split deterministically") {
  TempDir tmp;
  fs::path p = tmp.path / "nosplit.csv";
  std::string body = "x0,y,g\n";
  for (int i = 0; i < 30; ++i)
    body += std::to_string(0.1 * i) + "," + std::to_string(i % 2) + "," +
            std::to_string((i / 2) % 2) + "\n";
  write_text(p, body);
  Dataset a = io::load_dataset_csv(p, {}, {4.0 / 6, 1.0 / 6, 1.0 / 6}, 5);
  Dataset b = io::load_dataset_csv(p, {}, {4.0 / 6, 1.0 / 6, 1.0 / 6}, 5);
  CHECK(a.split == b.split);
  CHECK(a.count(Split::Train) == 20);
}

TEST_CASE("model JSON round-trips") {
  TempDir tmp;
  auto rng = testutil::make_rng(10);
  ModelParams m = testutil::random_model(rng, 4);
  TrainConfig cfg;
  io::save_model_json(tmp.path / "model.json", m, cfg, 1e-10);
  ModelParams back = io::load_model_json(tmp.path / "model.json");
  CHECK(back.same_as(m));
}

TEST_CASE("influence CSV round-trips and rejects foreign schemas") {
  TempDir tmp;
  InfluenceTable t;
  auto rng = testutil::make_rng(11);
  t.i_util = testutil::random_vector(rng, 12);
  t.i_metric = testutil::random_vector(rng, 12);
  t.metric_kind = MetricKind::Robustness;
  fs::path p = tmp.path / "influence.csv";
  io::save_influence_csv(p, t);
  io::InfluenceCsv back = io::load_influence_csv(p);
  CHECK(back.i_util == t.i_util);
  CHECK(back.i_metric == t.i_metric);
  CHECK(back.metric_kind == MetricKind::Robustness);

  write_text(tmp.path / "foreign.csv",
             "# schema: other-tool/9\nindex,i_util,i_metric,metric_kind\n");
  CHECK_THROWS_AS(io::load_influence_csv(tmp.path / "foreign.csv"), DataError);
}

TEST_CASE("atomic writes leave no temporary file behind") {
  TempDir tmp;
  io::atomic_write(tmp.path / "out.txt", "payload");
  CHECK(io::read_file(tmp.path / "out.txt") == "payload");
  CHECK(!fs::exists(tmp.path / "out.txt.tmp"));
}

TEST_CASE("17-digit formatting round-trips doubles") {
  auto rng = testutil::make_rng(12);
  for (int i = 0; i < 200; ++i) {
    double v = rng.normal() * std::pow(10.0, static_cast<double>(i % 13) - 6);
    CHECK(std::stod(io::fmt(v)) == v);
  }
}
