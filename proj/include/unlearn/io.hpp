#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "unlearn/oracle.hpp"

namespace unlearn::io {

// 17 significant digits: doubles round-trip exactly through the CSVs.
std::string fmt(double v);

// Write-temp-then-rename; partial files never appear under the final name.
void atomic_write(const std::filesystem::path& path, const std::string& body);

std::string read_file(const std::filesystem::path& path);

// All library-produced CSVs start with a "# schema: <name>/<version>" line;
// loaders reject unknown schemas. Dataset CSVs are plain (no schema line).
struct Csv {
  std::string schema;  // empty for plain files
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
void write_csv(const std::filesystem::path& path, const Csv& csv);
Csv read_csv(const std::filesystem::path& path);

struct CsvSchema {
  std::vector<std::string> feature_cols;  // empty: every remaining column
  std::string label_col = "y";
  std::string sensitive_col = "g";
  std::string split_col = "split";  // used when present
};

// Parses a dataset CSV. Rows with non-finite features and non-binary
// label/sensitive values are rejected with their row number. When the split
// column is absent the rows are split with `ratios` (default 4:1:1) and
// `seed`.
Dataset load_dataset_csv(const std::filesystem::path& path,
                         const CsvSchema& schema,
                         const std::array<double, 3>& ratios, uint64_t seed);
void save_dataset_csv(const std::filesystem::path& path, const Dataset& ds);

void save_model_json(const std::filesystem::path& path, const ModelParams& m,
                     const TrainConfig& cfg, double final_grad_norm);
ModelParams load_model_json(const std::filesystem::path& path);

void save_influence_csv(const std::filesystem::path& path,
                        const InfluenceTable& t);
struct InfluenceCsv {
  Vector i_util, i_metric;
  MetricKind metric_kind;
};
InfluenceCsv load_influence_csv(const std::filesystem::path& path);

void save_weights_csv(const std::filesystem::path& path,
                      const WeightVector& w);

void save_report_json(const std::filesystem::path& path,
                      const UnlearnReport& r);
// Wall-clock measurements live next to the report, not in it, so payload
// files stay byte-identical across reruns.
void save_timings_json(const std::filesystem::path& path, const StepTimes& t);

void save_loo_csv(const std::filesystem::path& path,
                  const std::vector<LooRecord>& records);
void save_correlation_summary_json(const std::filesystem::path& path,
                                   const CorrelationSummary& s);

void save_benchmark_csv(const std::filesystem::path& path,
                        const std::vector<BenchResult>& results,
                        MetricKind kind);
void save_sweep_csv(const std::filesystem::path& path,
                    const std::vector<SweepRow>& sweep,
                    const MetricsSnapshot& before, MetricKind kind);

// Every command drops a manifest beside its outputs: tool version, kernel
// backend, subcommand, effective options, and a timestamp (the one field
// excluded from reproducibility comparisons).
void save_manifest(const std::filesystem::path& path,
                   const std::string& subcommand,
                   const std::map<std::string, std::string>& options);

}  // namespace unlearn::io
