// Command-line surface for the soft-weighted unlearning library: synthetic
// data generation, training, influence evaluation, weight discovery, model
// correction, the leave-one-out oracle and the hard-vs-soft benchmark.
// Every run writes a manifest next to its outputs.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "unlearn/io.hpp"

namespace fs = std::filesystem;
using namespace unlearn;

namespace {

struct DataOpts {
  std::string path;
  std::string label_col = "y";
  std::string sensitive_col = "g";
  std::string split_col = "split";
  std::string feature_cols;           // comma-separated; empty = the rest
  std::string split_ratios = "4,1,1";  // normalized before use
  uint64_t seed = 1;
  bool standardize = false;
  bool sensitive_as_feature = false;
};

std::array<double, 3> parse_ratios(const std::string& s) {
  std::array<double, 3> r{};
  std::istringstream is(s);
  std::string tok;
  int k = 0;
  while (std::getline(is, tok, ',')) {
    if (k >= 3) throw DataError("split ratios need exactly three values");
    r[k++] = std::stod(tok);
  }
  if (k != 3) throw DataError("split ratios need exactly three values");
  double sum = r[0] + r[1] + r[2];
  if (!(sum > 0)) throw DataError("split ratios must be positive");
  for (double& v : r) v /= sum;
  return r;
}

std::vector<std::string> parse_list(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

void add_data_opts(CLI::App* cmd, DataOpts& o) {
  cmd->add_option("--data", o.path, "input dataset CSV")->required();
  cmd->add_option("--label-col", o.label_col, "label column name");
  cmd->add_option("--sensitive-col", o.sensitive_col,
                  "sensitive attribute column name");
  cmd->add_option("--split-col", o.split_col,
                  "split column name (rows are re-split when absent)");
  cmd->add_option("--feature-cols", o.feature_cols,
                  "comma-separated feature columns (default: all others)");
  cmd->add_option("--split-ratios", o.split_ratios,
                  "train,validation,test ratios used when re-splitting");
  cmd->add_option("--seed", o.seed, "seed for re-splitting");
  cmd->add_flag("--standardize", o.standardize,
                "z-score features with training-split statistics");
  cmd->add_flag("--sensitive-as-feature", o.sensitive_as_feature,
                "append the sensitive attribute to the feature matrix");
}

Dataset load_data(const DataOpts& o) {
  io::CsvSchema schema;
  schema.label_col = o.label_col;
  schema.sensitive_col = o.sensitive_col;
  schema.split_col = o.split_col;
  schema.feature_cols = parse_list(o.feature_cols);
  Dataset ds = io::load_dataset_csv(o.path, schema, parse_ratios(o.split_ratios),
                                    o.seed);
  if (o.sensitive_as_feature) {
    RowMatrix f(ds.n(), ds.dim() + 1);
    f.leftCols(ds.dim()) = ds.features;
    f.col(ds.dim()) = ds.sensitive;
    ds.features = std::move(f);
  }
  if (o.standardize) ds = standardize(ds);
  return ds;
}

void record_data_opts(std::map<std::string, std::string>& m,
                      const DataOpts& o) {
  m["data"] = o.path;
  m["label_col"] = o.label_col;
  m["sensitive_col"] = o.sensitive_col;
  m["split_col"] = o.split_col;
  m["feature_cols"] = o.feature_cols;
  m["split_ratios"] = o.split_ratios;
  m["seed"] = std::to_string(o.seed);
  m["standardize"] = o.standardize ? "1" : "0";
  m["sensitive_as_feature"] = o.sensitive_as_feature ? "1" : "0";
}

void add_train_opts(CLI::App* cmd, TrainConfig& c) {
  cmd->add_option("--l2", c.l2_reg, "ridge coefficient on theta");
  cmd->add_option("--damping", c.damping, "Hessian damping");
  cmd->add_option("--grad-tol", c.grad_tol, "gradient sup-norm tolerance");
  cmd->add_option("--max-iters", c.max_iters, "Newton iteration cap");
}

void record_train_opts(std::map<std::string, std::string>& m,
                       const TrainConfig& c) {
  m["l2"] = io::fmt(c.l2_reg);
  m["damping"] = io::fmt(c.damping);
  m["grad_tol"] = io::fmt(c.grad_tol);
  m["max_iters"] = std::to_string(c.max_iters);
}

void add_unlearn_opts(CLI::App* cmd, UnlearnConfig& c, std::string& method) {
  cmd->add_option("--method", method,
                  "soft_if | soft_gd | hard_if | hard_ga_ft");
  cmd->add_option("--epochs", c.epochs, "gradient-round budget");
  cmd->add_option("--lr-descent", c.lr_descent, "descent learning rate");
  cmd->add_option("--lr-ascent", c.lr_ascent, "ascent learning rate");
  cmd->add_option("--delta-threshold", c.delta_threshold,
                  "skip correction when the metric is already <= this");
  cmd->add_option("--fraction", c.hard_removal_fraction,
                  "hard-scheme removal fraction");
}

ModelParams train_or_load(const Dataset& ds, const TrainConfig& tcfg,
                          const std::string& model_path) {
  if (!model_path.empty()) return io::load_model_json(model_path);
  return train(ds, tcfg, ModelParams::zeros(ds.dim()));
}

void print_snapshot(const char* tag, const MetricsSnapshot& s) {
  std::cout << tag << ": utility_loss=" << s.utility_loss
            << " accuracy=" << s.test_accuracy << " dp=" << s.dp
            << " eop=" << s.eop << " robustness_loss=" << s.robustness_loss
            << "\n";
}

int run(int argc, char** argv) {
  CLI::App app{"soft-weighted machine unlearning for convex classifiers"};
  app.require_subcommand(1);
  app.footer(
      "Every subcommand also accepts --config FILE with flat key=value lines\n"
      "(keys are the long option names); explicit flags override the file.");

  // gen-synthetic
  auto* gen = app.add_subcommand("gen-synthetic", "generate a synthetic dataset");
  std::string gen_kind = "biased_gauss";
  Index gen_n = 1000, gen_d = 5;
  double gen_bias = 1.0;
  uint64_t gen_seed = 1;
  std::string gen_out;
  gen->add_option("--kind", gen_kind, "biased_gauss | symmetric | boundary2d");
  gen->add_option("--n", gen_n, "total number of rows");
  gen->add_option("--d", gen_d, "feature dimension");
  gen->add_option("--bias-strength", gen_bias, "bias strength");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out", gen_out, "output directory")->required();

  // train
  auto* tr = app.add_subcommand("train", "train the classifier");
  DataOpts tr_data;
  TrainConfig tr_cfg;
  std::string tr_out;
  add_data_opts(tr, tr_data);
  add_train_opts(tr, tr_cfg);
  tr->add_option("--out", tr_out, "output directory")->required();

  // influence
  auto* infl = app.add_subcommand("influence",
                                  "per-sample influence scores (Step 1)");
  DataOpts in_data;
  TrainConfig in_cfg;
  std::string in_metric = "dp", in_model, in_out;
  double in_gamma = 1.5;
  add_data_opts(infl, in_data);
  add_train_opts(infl, in_cfg);
  infl->add_option("--metric", in_metric, "dp | eop | robustness");
  infl->add_option("--gamma", in_gamma, "adversarial perturbation magnitude");
  infl->add_option("--model", in_model, "reuse a trained model.json");
  infl->add_option("--out", in_out, "output directory")->required();

  // solve-weights
  auto* sw = app.add_subcommand("solve-weights",
                                "weight-discovery QP (Step 2)");
  DataOpts sw_data;
  TrainConfig sw_cfg;
  std::string sw_metric = "dp", sw_model, sw_influence, sw_out;
  double sw_gamma = 1.5, sw_lambda = 1.0;
  double sw_delta = -1.0;
  bool sw_have_delta = false;
  add_data_opts(sw, sw_data);
  add_train_opts(sw, sw_cfg);
  sw->add_option("--metric", sw_metric, "dp | eop | robustness");
  sw->add_option("--gamma", sw_gamma, "adversarial perturbation magnitude");
  sw->add_option("--model", sw_model, "reuse a trained model.json");
  sw->add_option("--influence", sw_influence,
                 "reuse a Step-1 influence.csv (then --delta is required)");
  sw->add_option("--lambda", sw_lambda, "weight-change penalty");
  sw->add_option("--delta", sw_delta,
                 "over-correction bound (default: current metric)");
  sw->add_option("--out", sw_out, "output directory")->required();

  // unlearn
  auto* un = app.add_subcommand("unlearn",
                                "full pipeline: evaluate, optimize, correct");
  DataOpts un_data;
  TrainConfig un_tcfg;
  UnlearnConfig un_ucfg;
  std::string un_metric = "dp", un_method = "soft_if", un_out;
  double un_gamma = 1.5, un_lambda = 1.0, un_delta = -1.0;
  bool un_have_delta = false;
  add_data_opts(un, un_data);
  add_train_opts(un, un_tcfg);
  add_unlearn_opts(un, un_ucfg, un_method);
  un->add_option("--metric", un_metric, "dp | eop | robustness");
  un->add_option("--gamma", un_gamma, "adversarial perturbation magnitude");
  un->add_option("--lambda", un_lambda, "weight-change penalty");
  un->add_option("--delta", un_delta,
                 "over-correction bound (default: current metric)");
  un->add_option("--out", un_out, "output directory")->required();

  // loo-oracle
  auto* loo = app.add_subcommand("loo-oracle",
                                 "leave-one-out correlation experiment");
  DataOpts loo_data;
  TrainConfig loo_cfg;
  std::string loo_metric = "dp", loo_out;
  double loo_gamma = 1.5;
  Index loo_cap = 2000;
  bool loo_override = false;
  add_data_opts(loo, loo_data);
  add_train_opts(loo, loo_cfg);
  loo->add_option("--metric", loo_metric, "dp | eop | robustness");
  loo->add_option("--gamma", loo_gamma, "adversarial perturbation magnitude");
  loo->add_option("--cap", loo_cap, "largest training split to sweep");
  loo->add_flag("--override-cap", loo_override, "sweep past the cap");
  loo->add_option("--out", loo_out, "output directory")->required();

  // benchmark
  auto* bm = app.add_subcommand("benchmark",
                                "hard vs soft schemes plus deletion sweep");
  DataOpts bm_data;
  TrainConfig bm_tcfg;
  UnlearnConfig bm_ucfg;
  std::string bm_metric = "dp", bm_method = "soft_if", bm_algos = "if,ga_ft";
  std::string bm_out;
  double bm_gamma = 1.5, bm_lambda = 1.0, bm_delta = -1.0;
  bool bm_have_delta = false;
  add_data_opts(bm, bm_data);
  add_train_opts(bm, bm_tcfg);
  add_unlearn_opts(bm, bm_ucfg, bm_method);
  bm->add_option("--metric", bm_metric, "dp | eop | robustness");
  bm->add_option("--gamma", bm_gamma, "adversarial perturbation magnitude");
  bm->add_option("--lambda", bm_lambda, "weight-change penalty");
  bm->add_option("--delta", bm_delta,
                 "over-correction bound (default: current metric)");
  bm->add_option("--algorithms", bm_algos, "comma list of: if, ga_ft");
  bm->add_option("--out", bm_out, "output directory")->required();

  // Flat key=value config support: values from --config become trailing
  // arguments for keys the command line does not already carry, so explicit
  // flags always win. (CLI11 only reads config files at the root app, and
  // the root would need sectioned keys.)
  std::vector<std::string> args(argv + 1, argv + argc);
  for (std::size_t i = 0; i + 1 < args.size(); ++i) {
    if (args[i] != "--config") continue;
    std::string file = args[i + 1];
    args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
               args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
    std::istringstream is(io::read_file(file));
    std::string line;
    while (std::getline(is, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      auto eq = line.find('=');
      if (eq == std::string::npos)
        throw DataError("config line without '=': " + line);
      auto trim = [](std::string s) {
        s.erase(0, s.find_first_not_of(" \t"));
        s.erase(s.find_last_not_of(" \t") + 1);
        return s;
      };
      std::string key = "--" + trim(line.substr(0, eq));
      std::string value = trim(line.substr(eq + 1));
      if (std::find(args.begin(), args.end(), key) == args.end()) {
        args.push_back(key);
        args.push_back(value);
      }
    }
    break;
  }
  {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::ParseError& e) {
      return app.exit(e);
    }
  }
  sw_have_delta = sw->count("--delta") > 0;
  un_have_delta = un->count("--delta") > 0;
  bm_have_delta = bm->count("--delta") > 0;

  if (app.got_subcommand(gen)) {
    Dataset ds = gen_synthetic(synthetic_kind_from_string(gen_kind), gen_n,
                               gen_d, gen_bias, gen_seed);
    io::save_dataset_csv(fs::path(gen_out) / "data.csv", ds);
    io::save_manifest(fs::path(gen_out) / "manifest.json", "gen-synthetic",
                      {{"kind", gen_kind},
                       {"n", std::to_string(gen_n)},
                       {"d", std::to_string(gen_d)},
                       {"bias_strength", io::fmt(gen_bias)},
                       {"seed", std::to_string(gen_seed)},
                       {"out", gen_out}});
    std::cout << "wrote " << (fs::path(gen_out) / "data.csv").string() << " ("
              << ds.n() << " rows, d=" << ds.dim() << ")\n";
    return 0;
  }

  if (app.got_subcommand(tr)) {
    Dataset ds = load_data(tr_data);
    ModelParams m = train(ds, tr_cfg, ModelParams::zeros(ds.dim()));
    double gn = mean_gradient(ds, m, tr_cfg.l2_reg).lpNorm<Eigen::Infinity>();
    io::save_model_json(fs::path(tr_out) / "model.json", m, tr_cfg, gn);
    std::map<std::string, std::string> opts;
    record_data_opts(opts, tr_data);
    record_train_opts(opts, tr_cfg);
    opts["out"] = tr_out;
    io::save_manifest(fs::path(tr_out) / "manifest.json", "train", opts);
    std::cout << "trained model: d=" << ds.dim() << " grad_norm=" << gn
              << "\n";
    return 0;
  }

  if (app.got_subcommand(infl)) {
    Dataset ds = load_data(in_data);
    MetricKind kind = metric_kind_from_string(in_metric);
    ModelParams m = train_or_load(ds, in_cfg, in_model);
    EvalSet valset = EvalSet::from(ds, Split::Validation);
    AdversarialSet adv = craft_adversarial(valset, m, in_gamma);
    InfluenceTable t = influence_scores(ds, valset, &adv, m, in_cfg, kind);
    io::save_influence_csv(fs::path(in_out) / "influence.csv", t);
    if (in_model.empty()) {
      double gn = mean_gradient(ds, m, in_cfg.l2_reg).lpNorm<Eigen::Infinity>();
      io::save_model_json(fs::path(in_out) / "model.json", m, in_cfg, gn);
    }
    std::map<std::string, std::string> opts;
    record_data_opts(opts, in_data);
    record_train_opts(opts, in_cfg);
    opts["metric"] = in_metric;
    opts["gamma"] = io::fmt(in_gamma);
    opts["model"] = in_model;
    opts["out"] = in_out;
    io::save_manifest(fs::path(in_out) / "manifest.json", "influence", opts);
    std::cout << "influence table: " << t.n() << " rows\n";
    return 0;
  }

  if (app.got_subcommand(sw)) {
    MetricKind kind = metric_kind_from_string(sw_metric);
    QpInstance q;
    if (!sw_influence.empty()) {
      if (!sw_have_delta)
        throw DataError("--delta is required when reusing an influence CSV");
      io::InfluenceCsv t = io::load_influence_csv(sw_influence);
      q.i_util = t.i_util;
      q.i_metric = t.i_metric;
      q.lambda = sw_lambda;
      q.delta = sw_delta;
    } else {
      Dataset ds = load_data(sw_data);
      ModelParams m = train_or_load(ds, sw_cfg, sw_model);
      EvalSet valset = EvalSet::from(ds, Split::Validation);
      AdversarialSet adv = craft_adversarial(valset, m, sw_gamma);
      InfluenceTable t = influence_scores(ds, valset, &adv, m, sw_cfg, kind);
      double delta;
      if (sw_have_delta) {
        delta = sw_delta;
      } else if (kind == MetricKind::DP) {
        delta = demographic_parity(valset, m);
      } else if (kind == MetricKind::EOP) {
        delta = equal_opportunity(valset, m);
      } else {
        delta = robustness_loss(adv, m);
      }
      q = qp_from_table(t, sw_lambda, delta);
    }
    WeightVector w = solve_analytic(q);
    io::save_weights_csv(fs::path(sw_out) / "weights.csv", w);
    {
      std::ostringstream os;
      os << "{\n  \"schema\": \"unlearn-weights-summary/1\",\n"
         << "  \"case_id\": " << w.case_id << ",\n"
         << "  \"case_histogram\": {\"case" << w.case_id
         << "\": " << w.eps.size() << "},\n"
         << "  \"beta1\": " << io::fmt(w.dual_beta1) << ",\n"
         << "  \"beta2\": " << io::fmt(w.dual_beta2) << ",\n"
         << "  \"objective\": " << io::fmt(qp_objective(q, w.eps)) << ",\n"
         << "  \"lambda\": " << io::fmt(q.lambda) << ",\n"
         << "  \"delta\": " << io::fmt(q.delta) << ",\n"
         << "  \"note\": \"" << w.note << "\"\n}\n";
      io::atomic_write(fs::path(sw_out) / "weights_summary.json", os.str());
    }
    std::map<std::string, std::string> opts;
    if (sw_influence.empty()) record_data_opts(opts, sw_data);
    record_train_opts(opts, sw_cfg);
    opts["metric"] = sw_metric;
    opts["gamma"] = io::fmt(sw_gamma);
    opts["lambda"] = io::fmt(sw_lambda);
    opts["delta"] = io::fmt(q.delta);
    opts["influence"] = sw_influence;
    opts["model"] = sw_model;
    opts["out"] = sw_out;
    io::save_manifest(fs::path(sw_out) / "manifest.json", "solve-weights",
                      opts);
    std::cout << "weights: case " << w.case_id << ", n=" << w.eps.size()
              << "\n";
    return 0;
  }

  if (app.got_subcommand(un)) {
    Dataset ds = load_data(un_data);
    MetricKind kind = metric_kind_from_string(un_metric);
    un_ucfg.method = method_from_string(un_method);
    std::optional<double> delta_override;
    if (un_have_delta) delta_override = un_delta;
    std::map<std::string, std::string> opts;
    record_data_opts(opts, un_data);
    record_train_opts(opts, un_tcfg);
    opts["metric"] = un_metric;
    opts["method"] = un_method;
    opts["epochs"] = std::to_string(un_ucfg.epochs);
    opts["lr_descent"] = io::fmt(un_ucfg.lr_descent);
    opts["lr_ascent"] = io::fmt(un_ucfg.lr_ascent);
    opts["delta_threshold"] = io::fmt(un_ucfg.delta_threshold);
    opts["fraction"] = io::fmt(un_ucfg.hard_removal_fraction);
    opts["gamma"] = io::fmt(un_gamma);
    opts["lambda"] = io::fmt(un_lambda);
    opts["delta"] = un_have_delta ? io::fmt(un_delta) : "auto";
    opts["out"] = un_out;
    try {
      FrameworkResult fr = run_framework(ds, un_ucfg, un_tcfg, kind, un_gamma,
                                         un_lambda, delta_override);
      io::save_report_json(fs::path(un_out) / "report.json", fr.report);
      io::save_timings_json(fs::path(un_out) / "timings.json",
                            fr.report.seconds);
      io::save_weights_csv(fs::path(un_out) / "weights.csv", fr.weights);
      io::save_influence_csv(fs::path(un_out) / "influence.csv", fr.table);
      io::save_manifest(fs::path(un_out) / "manifest.json", "unlearn", opts);
      print_snapshot("before", fr.report.before);
      print_snapshot("after", fr.report.after);
      std::cout << (fr.report.corrected ? "correction applied"
                                        : "correction skipped (metric <= "
                                          "delta threshold)")
                << "\n";
    } catch (const FrameworkError& e) {
      io::save_report_json(fs::path(un_out) / "report_partial.json", e.partial);
      io::atomic_write(fs::path(un_out) / "error.json",
                       std::string("{\n  \"step\": \"") + e.step +
                           "\",\n  \"message\": \"" + e.what() + "\"\n}\n");
      io::save_manifest(fs::path(un_out) / "manifest.json", "unlearn", opts);
      if (e.data_cause) throw DataError(e.what());
      throw NumericalError(e.what());
    }
    return 0;
  }

  if (app.got_subcommand(loo)) {
    Dataset ds = load_data(loo_data);
    MetricKind kind = metric_kind_from_string(loo_metric);
    CorrelationResult r = run_correlation_experiment(ds, loo_cfg, kind,
                                                     loo_gamma, loo_cap,
                                                     loo_override);
    io::save_loo_csv(fs::path(loo_out) / "loo_records.csv", r.records);
    io::save_correlation_summary_json(fs::path(loo_out) / "loo_summary.json",
                                      r.summary);
    std::map<std::string, std::string> opts;
    record_data_opts(opts, loo_data);
    record_train_opts(opts, loo_cfg);
    opts["metric"] = loo_metric;
    opts["gamma"] = io::fmt(loo_gamma);
    opts["cap"] = std::to_string(loo_cap);
    opts["override_cap"] = loo_override ? "1" : "0";
    opts["out"] = loo_out;
    io::save_manifest(fs::path(loo_out) / "manifest.json", "loo-oracle", opts);
    std::cout << "loo sweep: " << r.records.size()
              << " retrains; pearson(util)=" << r.summary.pearson_util
              << " pearson(metric)=" << r.summary.pearson_metric << "\n";
    return 0;
  }

  if (app.got_subcommand(bm)) {
    Dataset ds = load_data(bm_data);
    MetricKind kind = metric_kind_from_string(bm_metric);
    bm_ucfg.method = method_from_string(bm_method);
    std::optional<double> delta_override;
    if (bm_have_delta) delta_override = bm_delta;
    std::vector<Algorithm> algos;
    for (const std::string& a : parse_list(bm_algos))
      algos.push_back(algorithm_from_string(a));
    BenchOutput out = run_benchmark(ds, algos, bm_ucfg, bm_tcfg, kind,
                                    bm_gamma, bm_lambda, delta_override);
    io::save_benchmark_csv(fs::path(bm_out) / "benchmark.csv", out.results,
                           kind);
    io::save_sweep_csv(fs::path(bm_out) / "sweep.csv", out.sweep, out.before,
                       kind);
    std::map<std::string, std::string> opts;
    record_data_opts(opts, bm_data);
    record_train_opts(opts, bm_tcfg);
    opts["metric"] = bm_metric;
    opts["algorithms"] = bm_algos;
    opts["epochs"] = std::to_string(bm_ucfg.epochs);
    opts["lr_descent"] = io::fmt(bm_ucfg.lr_descent);
    opts["lr_ascent"] = io::fmt(bm_ucfg.lr_ascent);
    opts["fraction"] = io::fmt(bm_ucfg.hard_removal_fraction);
    opts["gamma"] = io::fmt(bm_gamma);
    opts["lambda"] = io::fmt(bm_lambda);
    opts["delta"] = bm_have_delta ? io::fmt(bm_delta) : "auto";
    opts["out"] = bm_out;
    io::save_manifest(fs::path(bm_out) / "manifest.json", "benchmark", opts);
    for (const BenchResult& r : out.results)
      std::cout << r.scheme << "/" << r.algorithm << ": metric "
                << metric_of(r.before, kind) << " -> "
                << metric_of(r.after, kind) << ", utility "
                << r.before.utility_loss << " -> " << r.after.utility_loss
                << (r.free_lunch ? "  [free lunch]" : "") << "\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
