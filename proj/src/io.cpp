#include "unlearn/io.hpp"

#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "unlearn/kernels.hpp"

namespace unlearn::io {

using nlohmann::json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void atomic_write(const std::filesystem::path& path, const std::string& body) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open '" + tmp.string() + "' for write");
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out) throw DataError("short write to '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, Index row, const std::string& col) {
  const char* begin = s.c_str();
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE)
    throw DataError("row " + std::to_string(row) + ", column '" + col +
                    "': cannot parse '" + s + "' as a number");
  return v;
}

double parse_binary(const std::string& s, Index row, const std::string& col) {
  double v = parse_double(s, row, col);
  if (v != 0.0 && v != 1.0)
    throw DataError("row " + std::to_string(row) + ", column '" + col +
                    "': value '" + s + "' is not binary");
  return v;
}

std::string now_iso8601() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

void write_csv(const std::filesystem::path& path, const Csv& csv) {
  std::ostringstream os;
  if (!csv.schema.empty()) os << "# schema: " << csv.schema << "\n";
  for (std::size_t j = 0; j < csv.header.size(); ++j)
    os << (j ? "," : "") << csv.header[j];
  os << "\n";
  for (const auto& row : csv.rows) {
    for (std::size_t j = 0; j < row.size(); ++j)
      os << (j ? "," : "") << row[j];
    os << "\n";
  }
  atomic_write(path, os.str());
}

Csv read_csv(const std::filesystem::path& path) {
  std::string body = read_file(path);
  Csv csv;
  std::istringstream is(body);
  std::string line;
  bool have_header = false;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string tag = "# schema: ";
      if (line.rfind(tag, 0) == 0) csv.schema = line.substr(tag.size());
      continue;
    }
    if (!have_header) {
      csv.header = split_line(line);
      have_header = true;
    } else {
      csv.rows.push_back(split_line(line));
    }
  }
  if (!have_header) throw DataError("empty file: '" + path.string() + "'");
  return csv;
}

Dataset load_dataset_csv(const std::filesystem::path& path,
                         const CsvSchema& schema,
                         const std::array<double, 3>& ratios, uint64_t seed) {
  Csv csv = read_csv(path);
  if (csv.rows.empty()) throw DataError("no data rows in '" + path.string() + "'");

  auto col_index = [&](const std::string& name) -> int {
    for (std::size_t j = 0; j < csv.header.size(); ++j)
      if (csv.header[j] == name) return static_cast<int>(j);
    return -1;
  };
  int label_col = col_index(schema.label_col);
  if (label_col < 0)
    throw DataError("missing label column '" + schema.label_col + "'");
  int sens_col = col_index(schema.sensitive_col);
  if (sens_col < 0)
    throw DataError("missing sensitive column '" + schema.sensitive_col + "'");
  int split_col = col_index(schema.split_col);

  std::vector<int> feat_cols;
  if (schema.feature_cols.empty()) {
    for (std::size_t j = 0; j < csv.header.size(); ++j) {
      int jj = static_cast<int>(j);
      if (jj == label_col || jj == sens_col || jj == split_col) continue;
      feat_cols.push_back(jj);
    }
  } else {
    for (const std::string& name : schema.feature_cols) {
      int j = col_index(name);
      if (j < 0) throw DataError("missing feature column '" + name + "'");
      feat_cols.push_back(j);
    }
  }
  if (feat_cols.empty()) throw DataError("no feature columns");

  const Index n = static_cast<Index>(csv.rows.size());
  const Index d = static_cast<Index>(feat_cols.size());
  Dataset ds;
  ds.features.resize(n, d);
  ds.labels.resize(n);
  ds.sensitive.resize(n);
  ds.split.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const auto& row = csv.rows[static_cast<std::size_t>(i)];
    if (row.size() != csv.header.size())
      throw DataError("row " + std::to_string(i + 1) + " has " +
                      std::to_string(row.size()) + " fields, expected " +
                      std::to_string(csv.header.size()));
    for (Index j = 0; j < d; ++j) {
      double v = parse_double(row[static_cast<std::size_t>(feat_cols[j])],
                              i + 1, csv.header[feat_cols[j]]);
      if (!std::isfinite(v))
        throw DataError("row " + std::to_string(i + 1) +
                        ": non-finite feature in column '" +
                        csv.header[feat_cols[j]] + "'");
      ds.features(i, j) = v;
    }
    ds.labels[i] =
        parse_binary(row[static_cast<std::size_t>(label_col)], i + 1,
                     schema.label_col);
    ds.sensitive[i] =
        parse_binary(row[static_cast<std::size_t>(sens_col)], i + 1,
                     schema.sensitive_col);
    if (split_col >= 0)
      ds.split[static_cast<std::size_t>(i)] =
          split_from_string(row[static_cast<std::size_t>(split_col)]);
  }
  ds.source = "csv:" + path.string();
  ds.seed = seed;
  if (split_col < 0) ds = split(ds, ratios, seed);
  ds.validate();
  return ds;
}

void save_dataset_csv(const std::filesystem::path& path, const Dataset& ds) {
  Csv csv;
  for (Index j = 0; j < ds.dim(); ++j)
    csv.header.push_back("x" + std::to_string(j));
  csv.header.push_back("y");
  csv.header.push_back("g");
  csv.header.push_back("split");
  csv.rows.reserve(static_cast<std::size_t>(ds.n()));
  for (Index i = 0; i < ds.n(); ++i) {
    std::vector<std::string> row;
    row.reserve(static_cast<std::size_t>(ds.dim()) + 3);
    for (Index j = 0; j < ds.dim(); ++j) row.push_back(fmt(ds.features(i, j)));
    row.push_back(ds.labels[i] == 1.0 ? "1" : "0");
    row.push_back(ds.sensitive[i] == 1.0 ? "1" : "0");
    row.push_back(to_string(ds.split[static_cast<std::size_t>(i)]));
    csv.rows.push_back(std::move(row));
  }
  write_csv(path, csv);
}

void save_model_json(const std::filesystem::path& path, const ModelParams& m,
                     const TrainConfig& cfg, double final_grad_norm) {
  json j;
  j["schema"] = "unlearn-model/1";
  j["theta"] = json::array();
  for (Index i = 0; i < m.theta.size(); ++i)
    j["theta"].push_back(m.theta[i]);
  j["intercept"] = m.intercept;
  j["train_config"] = {{"l2_reg", cfg.l2_reg},
                       {"damping", cfg.damping},
                       {"grad_tol", cfg.grad_tol},
                       {"max_iters", cfg.max_iters}};
  j["final_grad_norm"] = final_grad_norm;
  atomic_write(path, j.dump(2) + "\n");
}

ModelParams load_model_json(const std::filesystem::path& path) {
  json j = json::parse(read_file(path));
  if (j.value("schema", "") != "unlearn-model/1")
    throw DataError("unknown model schema in '" + path.string() + "'");
  ModelParams m;
  const auto& th = j.at("theta");
  m.theta.resize(static_cast<Index>(th.size()));
  for (std::size_t i = 0; i < th.size(); ++i)
    m.theta[static_cast<Index>(i)] = th[i].get<double>();
  m.intercept = j.at("intercept").get<double>();
  return m;
}

void save_influence_csv(const std::filesystem::path& path,
                        const InfluenceTable& t) {
  Csv csv;
  csv.schema = "unlearn-influence/1";
  csv.header = {"index", "i_util", "i_metric", "metric_kind"};
  for (Index i = 0; i < t.n(); ++i)
    csv.rows.push_back({std::to_string(i), fmt(t.i_util[i]),
                        fmt(t.i_metric[i]), to_string(t.metric_kind)});
  write_csv(path, csv);
}

InfluenceCsv load_influence_csv(const std::filesystem::path& path) {
  Csv csv = read_csv(path);
  if (csv.schema != "unlearn-influence/1")
    throw DataError("unknown influence schema '" + csv.schema + "' in '" +
                    path.string() + "'");
  InfluenceCsv out;
  const Index n = static_cast<Index>(csv.rows.size());
  if (n == 0) throw DataError("empty influence table");
  out.i_util.resize(n);
  out.i_metric.resize(n);
  for (Index i = 0; i < n; ++i) {
    const auto& row = csv.rows[static_cast<std::size_t>(i)];
    if (row.size() != 4)
      throw DataError("influence row " + std::to_string(i + 1) + " malformed");
    out.i_util[i] = parse_double(row[1], i + 1, "i_util");
    out.i_metric[i] = parse_double(row[2], i + 1, "i_metric");
    out.metric_kind = metric_kind_from_string(row[3]);
  }
  return out;
}

void save_weights_csv(const std::filesystem::path& path,
                      const WeightVector& w) {
  Csv csv;
  csv.schema = "unlearn-weights/1";
  csv.header = {"index", "eps", "case_id"};
  for (Index i = 0; i < w.eps.size(); ++i)
    csv.rows.push_back(
        {std::to_string(i), fmt(w.eps[i]), std::to_string(w.case_id)});
  write_csv(path, csv);
}

namespace {

json snapshot_json(const MetricsSnapshot& s) {
  return {{"utility_loss", s.utility_loss},
          {"test_accuracy", s.test_accuracy},
          {"dp", s.dp},
          {"eop", s.eop},
          {"robustness_loss", s.robustness_loss}};
}

}  // namespace

void save_report_json(const std::filesystem::path& path,
                      const UnlearnReport& r) {
  json j;
  j["schema"] = "unlearn-report/1";
  j["method"] = to_string(r.method);
  j["metric_kind"] = to_string(r.metric_kind);
  j["corrected"] = r.corrected;
  j["n_train"] = r.n_train;
  j["before"] = snapshot_json(r.before);
  j["after"] = snapshot_json(r.after);
  j["linearized_utility_change"] = r.linearized_utility_change;
  j["predicted_metric_change"] = r.predicted_metric_change;
  j["case_histogram"] = {{"case1", r.case_histogram[0]},
                         {"case2", r.case_histogram[1]},
                         {"case3", r.case_histogram[2]},
                         {"case4", r.case_histogram[3]}};
  j["qp"] = {{"lambda", r.qp_lambda},
             {"delta", r.qp_delta},
             {"case_id", r.qp_case},
             {"beta1", r.qp_beta1},
             {"beta2", r.qp_beta2}};
  atomic_write(path, j.dump(2) + "\n");
}

void save_timings_json(const std::filesystem::path& path, const StepTimes& t) {
  json j;
  j["schema"] = "unlearn-timings/1";
  j["evaluate_s"] = t.evaluate;
  j["optimize_s"] = t.optimize;
  j["correct_s"] = t.correct;
  j["total_s"] = t.total();
  atomic_write(path, j.dump(2) + "\n");
}

void save_loo_csv(const std::filesystem::path& path,
                  const std::vector<LooRecord>& records) {
  Csv csv;
  csv.schema = "unlearn-loo/1";
  csv.header = {"index",
                "actual_delta_util",
                "actual_delta_metric",
                "actual_delta_util_test",
                "actual_delta_metric_test",
                "est_util",
                "est_metric"};
  for (const LooRecord& r : records)
    csv.rows.push_back({std::to_string(r.index), fmt(r.actual_delta_util),
                        fmt(r.actual_delta_metric),
                        fmt(r.actual_delta_util_test),
                        fmt(r.actual_delta_metric_test), fmt(r.est_util),
                        fmt(r.est_metric)});
  write_csv(path, csv);
}

void save_correlation_summary_json(const std::filesystem::path& path,
                                   const CorrelationSummary& s) {
  json j;
  j["schema"] = "unlearn-loo-summary/1";
  j["metric_kind"] = to_string(s.metric_kind);
  j["pearson_util"] = s.pearson_util;
  j["spearman_util"] = s.spearman_util;
  j["pearson_metric"] = s.pearson_metric;
  j["spearman_metric"] = s.spearman_metric;
  j["util_metric_spearman_val"] = s.util_metric_spearman_val;
  j["util_metric_spearman_test"] = s.util_metric_spearman_test;
  atomic_write(path, j.dump(2) + "\n");
}

void save_benchmark_csv(const std::filesystem::path& path,
                        const std::vector<BenchResult>& results,
                        MetricKind kind) {
  Csv csv;
  csv.schema = "unlearn-benchmark/1";
  csv.header = {"scheme",        "algorithm",    "before_metric",
                "after_metric",  "before_util",  "after_util",
                "free_lunch"};
  for (const BenchResult& r : results)
    csv.rows.push_back({r.scheme, r.algorithm,
                        fmt(metric_of(r.before, kind)),
                        fmt(metric_of(r.after, kind)),
                        fmt(r.before.utility_loss), fmt(r.after.utility_loss),
                        r.free_lunch ? "1" : "0"});
  write_csv(path, csv);
}

void save_sweep_csv(const std::filesystem::path& path,
                    const std::vector<SweepRow>& sweep,
                    const MetricsSnapshot& before, MetricKind kind) {
  Csv csv;
  csv.schema = "unlearn-sweep/1";
  csv.header = {"rate", "after_metric", "after_util", "metric_gain"};
  for (const SweepRow& r : sweep)
    csv.rows.push_back({fmt(r.rate), fmt(metric_of(r.after, kind)),
                        fmt(r.after.utility_loss),
                        fmt(metric_of(before, kind) -
                            metric_of(r.after, kind))});
  write_csv(path, csv);
}

void save_manifest(const std::filesystem::path& path,
                   const std::string& subcommand,
                   const std::map<std::string, std::string>& options) {
  json j;
  j["schema"] = "unlearn-manifest/1";
  j["tool_version"] = kVersion;
  j["kernel_backend"] =
      kernels::backend_name(kernels::active_backend());
  j["subcommand"] = subcommand;
  j["options"] = options;
  j["timestamp"] = now_iso8601();
  atomic_write(path, j.dump(2) + "\n");
}

}  // namespace unlearn::io
