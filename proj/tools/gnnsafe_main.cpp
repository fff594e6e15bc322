// gnnsafe: benchmark generation, training, evaluation, and grid sweeps for
// energy-based OOD detection on graphs.
//
// Exit codes: 0 success, 2 configuration/validation failure, 3 numeric
// failure (non-finite loss; the message names the epoch).

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gnnsafe/gnnsafe.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) out.push_back(item);
  return out;
}

std::vector<double> parse_double_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const std::string& item : split_commas(s)) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw std::invalid_argument(what + ": cannot parse '" + item + "' as a number");
    }
  }
  if (out.empty()) throw std::invalid_argument(what + ": empty list");
  return out;
}

std::vector<std::int32_t> parse_int_list(const std::string& s, const std::string& what) {
  std::vector<std::int32_t> out;
  for (const std::string& item : split_commas(s)) {
    try {
      std::size_t pos = 0;
      out.push_back(static_cast<std::int32_t>(std::stol(item, &pos)));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw std::invalid_argument(what + ": cannot parse '" + item + "' as an integer");
    }
  }
  return out;
}

// Config files are flat JSON objects keyed like the long flags (hyphens as
// underscores). Flags given on the command line override file values; keys
// outside the subcommand's schema are rejected.
class ConfigMerger {
 public:
  ConfigMerger(CLI::App* cmd, std::string* config_path) : cmd_(cmd), config_path_(config_path) {}

  template <typename T>
  void bind(const std::string& key, const std::string& flag, T* target) {
    setters_[key] = [this, flag, target, key](const nlohmann::json& v) {
      if (cmd_->count(flag) > 0) return;  // command line wins
      try {
        *target = v.get<T>();
      } catch (const nlohmann::json::exception&) {
        throw std::invalid_argument("config: field '" + key + "' has the wrong type");
      }
    };
  }

  void apply() const {
    if (config_path_->empty()) return;
    const ordered_json j = gnnsafe::detail::read_json(*config_path_);
    if (!j.is_object()) throw std::invalid_argument("config: top level must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      const auto it = setters_.find(key);
      if (it == setters_.end())
        throw std::invalid_argument("config: unknown key '" + key + "'");
      it->second(value);
    }
  }

 private:
  CLI::App* cmd_;
  std::string* config_path_;
  std::map<std::string, std::function<void(const nlohmann::json&)>> setters_;
};

void write_resolved_config(const fs::path& out_dir, const ordered_json& resolved) {
  fs::create_directories(out_dir);
  gnnsafe::detail::write_json(out_dir / "resolved_config.json", resolved);
}

std::size_t env_threads() {
  const char* raw = std::getenv("GNNSAFE_THREADS");
  if (raw == nullptr || *raw == '\0') return 1;
  try {
    std::size_t pos = 0;
    const long v = std::stol(raw, &pos);
    if (pos != std::string(raw).size() || v < 1) throw std::invalid_argument(raw);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string("GNNSAFE_THREADS: invalid value '") + raw + "'");
  }
}

struct GenOpts {
  std::string config, dataset, out, scenario = "structure", masks;
  std::vector<std::string> ood_datasets;
  std::string exposure_dataset;
  std::string leave_out_csv, ratios_csv = "0.1,0.1,0.8";
  std::uint64_t seed = 0;
  double homophily = 5.0;
  bool no_exposure = false;
};

int run_gen(const GenOpts& o) {
  if (o.dataset.empty()) throw std::invalid_argument("gen: --dataset is required");
  if (o.out.empty()) throw std::invalid_argument("gen: --out is required");
  const std::vector<double> ratios = parse_double_list(o.ratios_csv, "--ratios");
  if (ratios.size() != 3) throw std::invalid_argument("--ratios: need exactly 3 fractions");

  auto g = std::make_shared<const gnnsafe::Graph>(gnnsafe::load_graph(o.dataset));
  gnnsafe::GenOptions opt;
  opt.homophily = o.homophily;
  opt.with_exposure = !o.no_exposure;
  opt.train_frac = ratios[0];
  opt.valid_frac = ratios[1];
  opt.test_frac = ratios[2];
  if (fs::exists(fs::path(o.dataset) / "splits.json"))
    opt.splits = gnnsafe::load_splits(fs::path(o.dataset) / "splits.json");

  gnnsafe::Benchmark bench;
  if (o.scenario == "structure") {
    bench = gnnsafe::gen_structure_ood(g, o.seed, opt);
  } else if (o.scenario == "feature") {
    bench = gnnsafe::gen_feature_ood(g, o.seed, opt);
  } else if (o.scenario == "label_leaveout") {
    const std::vector<std::int32_t> leave_out =
        o.leave_out_csv.empty() ? gnnsafe::default_leave_out(g->num_classes)
                                : parse_int_list(o.leave_out_csv, "--leave-out");
    bench = gnnsafe::gen_label_leaveout_ood(g, leave_out, o.seed, opt);
  } else if (o.scenario == "multigraph") {
    if (o.ood_datasets.empty())
      throw std::invalid_argument("gen: multigraph needs at least one --ood-dataset");
    std::vector<std::shared_ptr<const gnnsafe::Graph>> oods;
    for (const std::string& d : o.ood_datasets)
      oods.push_back(std::make_shared<const gnnsafe::Graph>(gnnsafe::load_graph(d)));
    std::shared_ptr<const gnnsafe::Graph> expo;
    if (!o.exposure_dataset.empty())
      expo = std::make_shared<const gnnsafe::Graph>(gnnsafe::load_graph(o.exposure_dataset));
    const gnnsafe::Splits splits = gnnsafe::detail::splits_for(*g, o.seed, opt);
    bench = gnnsafe::assemble_benchmark(g, splits, std::move(oods), std::move(expo));
  } else if (o.scenario == "as_is") {
    if (o.masks.empty()) throw std::invalid_argument("gen: as_is needs --masks");
    const ordered_json mj = gnnsafe::detail::read_json(o.masks);
    bench.id_graph = g;
    bench.splits = gnnsafe::detail::splits_for(*g, o.seed, opt);
    if (!mj.contains("ood_test") || !mj["ood_test"].is_array())
      throw std::invalid_argument(o.masks + ": missing array 'ood_test'");
    for (std::size_t u = 0; u < mj["ood_test"].size(); ++u) {
      gnnsafe::OODUnit unit;
      unit.graph = g;
      for (const auto& v : mj["ood_test"][u]) unit.ood_mask.push_back(v.get<std::size_t>());
      std::sort(unit.ood_mask.begin(), unit.ood_mask.end());
      bench.ood_test.push_back(std::move(unit));
    }
    if (mj.contains("ood_exposure") && !mj["ood_exposure"].is_null()) {
      gnnsafe::OODUnit unit;
      unit.graph = g;
      for (const auto& v : mj["ood_exposure"]) unit.ood_mask.push_back(v.get<std::size_t>());
      std::sort(unit.ood_mask.begin(), unit.ood_mask.end());
      bench.ood_exposure = std::move(unit);
    }
    bench.validate();
  } else {
    throw std::invalid_argument("gen: unknown scenario '" + o.scenario + "'");
  }

  gnnsafe::save_benchmark(bench, o.out);
  ordered_json resolved;
  resolved["command"] = "gen";
  resolved["dataset"] = o.dataset;
  resolved["out"] = o.out;
  resolved["scenario"] = o.scenario;
  resolved["seed"] = o.seed;
  resolved["homophily"] = o.homophily;
  resolved["no_exposure"] = o.no_exposure;
  resolved["ratios"] = ratios;
  if (!o.leave_out_csv.empty()) resolved["leave_out"] = o.leave_out_csv;
  if (!o.ood_datasets.empty()) resolved["ood_datasets"] = o.ood_datasets;
  if (!o.exposure_dataset.empty()) resolved["exposure_dataset"] = o.exposure_dataset;
  if (!o.masks.empty()) resolved["masks"] = o.masks;
  if (!bench.class_remap.empty()) resolved["class_remap"] = bench.class_remap;
  write_resolved_config(o.out, resolved);

  std::ostringstream line;
  line << "gen: id=" << bench.id_graph->num_nodes << " nodes (train=" << bench.splits.train.size()
       << " valid=" << bench.splits.valid.size() << " test=" << bench.splits.test.size() << ")";
  for (std::size_t u = 0; u < bench.ood_test.size(); ++u)
    line << ", ood_test_" << u << "=" << bench.ood_test[u].ood_mask.size();
  if (bench.ood_exposure) line << ", exposure=" << bench.ood_exposure->ood_mask.size();
  std::cout << line.str() << "\n";
  return 0;
}

struct TrainOpts {
  std::string config, benchmark, out, encoder = "gcn";
  std::uint64_t seed = 0;
  std::size_t epochs = 200, k = 2, layers = 2, hidden = 64;
  double lr = 0.01, lambda = 1.0, t_in = -7.0, t_out = -2.0, alpha = 0.5, weight_decay = 0.0;
  bool regularize = false, no_feature_norm = false;
};

gnnsafe::TrainConfig to_train_config(const TrainOpts& o) {
  gnnsafe::TrainConfig tc;
  tc.lr = o.lr;
  tc.epochs = o.epochs;
  tc.lambda = o.lambda;
  tc.t_in = o.t_in;
  tc.t_out = o.t_out;
  tc.alpha = o.alpha;
  tc.K = o.k;
  tc.weight_decay = o.weight_decay;
  tc.seed = o.seed;
  tc.use_regularization = o.regularize;
  return tc;
}

gnnsafe::EncoderConfig to_encoder_config(const TrainOpts& o, std::size_t num_classes) {
  gnnsafe::EncoderConfig cfg;
  cfg.kind = gnnsafe::encoder_kind_from(o.encoder);
  cfg.layers = o.layers;
  cfg.hidden = o.hidden;
  cfg.out_classes = num_classes;
  cfg.use_feature_norm = !o.no_feature_norm;
  return cfg;
}

ordered_json train_resolved(const TrainOpts& o, const char* command) {
  ordered_json resolved;
  resolved["command"] = command;
  resolved["benchmark"] = o.benchmark;
  resolved["out"] = o.out;
  resolved["seed"] = o.seed;
  resolved["epochs"] = o.epochs;
  resolved["lr"] = o.lr;
  resolved["lambda"] = o.lambda;
  resolved["t_in"] = o.t_in;
  resolved["t_out"] = o.t_out;
  resolved["alpha"] = o.alpha;
  resolved["k"] = o.k;
  resolved["weight_decay"] = o.weight_decay;
  resolved["regularize"] = o.regularize;
  resolved["encoder"] = o.encoder;
  resolved["layers"] = o.layers;
  resolved["hidden"] = o.hidden;
  resolved["feature_norm"] = !o.no_feature_norm;
  return resolved;
}

int run_train(const TrainOpts& o) {
  if (o.benchmark.empty()) throw std::invalid_argument("train: --benchmark is required");
  if (o.out.empty()) throw std::invalid_argument("train: --out is required");
  const gnnsafe::Benchmark bench = gnnsafe::load_benchmark(o.benchmark);
  const gnnsafe::EncoderConfig enc_cfg = to_encoder_config(o, bench.id_graph->num_classes);
  const gnnsafe::TrainConfig tc = to_train_config(o);
  const gnnsafe::TrainResult result = gnnsafe::train(bench, enc_cfg, tc);

  fs::create_directories(o.out);
  gnnsafe::Checkpoint ck{enc_cfg, bench.id_graph->num_features(), o.seed, bench.class_remap,
                         result.params};
  gnnsafe::save_checkpoint(ck, o.out);
  gnnsafe::write_train_log(result.history, fs::path(o.out) / "train_log.jsonl");
  write_resolved_config(o.out, train_resolved(o, "train"));
  std::printf("train: best_epoch=%zu val_loss=%.6f val_acc=%.4f\n",
              result.history.best_epoch + 1, result.history.best_val_loss,
              result.history.val_acc[result.history.best_epoch]);
  return 0;
}

struct EvalOpts {
  std::string config, benchmark, model, out, score = "energy";
  std::size_t k = 2;
  double alpha = 0.5;
};

int run_eval(const EvalOpts& o) {
  if (o.benchmark.empty()) throw std::invalid_argument("eval: --benchmark is required");
  if (o.model.empty()) throw std::invalid_argument("eval: --model is required");
  if (o.out.empty()) throw std::invalid_argument("eval: --out is required");
  const gnnsafe::Benchmark bench = gnnsafe::load_benchmark(o.benchmark);
  const gnnsafe::Checkpoint ck = gnnsafe::load_checkpoint(o.model);
  if (ck.in_dim != bench.id_graph->num_features())
    throw std::invalid_argument("eval: checkpoint feature dimension (" +
                                std::to_string(ck.in_dim) + ") does not match benchmark (" +
                                std::to_string(bench.id_graph->num_features()) + ")");
  if (ck.cfg.out_classes != bench.id_graph->num_classes)
    throw std::invalid_argument("eval: checkpoint class count does not match benchmark");

  std::vector<gnnsafe::UnitScores> dumps;
  const gnnsafe::DetectionReport report = gnnsafe::evaluate(
      bench, ck.params, ck.cfg, o.alpha, o.k, gnnsafe::score_kind_from(o.score), &dumps);

  ordered_json resolved;
  resolved["command"] = "eval";
  resolved["benchmark"] = o.benchmark;
  resolved["model"] = o.model;
  resolved["out"] = o.out;
  resolved["k"] = o.k;
  resolved["alpha"] = o.alpha;
  resolved["score"] = o.score;
  resolved["model_seed"] = ck.seed;

  fs::create_directories(o.out);
  gnnsafe::detail::write_json(fs::path(o.out) / "report.json",
                              gnnsafe::report_to_json(report, resolved, utc_timestamp()));
  for (const gnnsafe::UnitScores& d : dumps)
    gnnsafe::write_unit_scores_csv(d, fs::path(o.out) / ("scores_" + d.name + ".csv"));
  write_resolved_config(o.out, resolved);
  std::printf("eval: score=%s k=%zu auroc=%.4f aupr=%.4f fpr95=%.4f acc=%.4f\n",
              report.score.c_str(), report.k, report.mean_auroc, report.mean_aupr,
              report.mean_fpr95, report.id_test_accuracy);
  return 0;
}

struct SweepOpts {
  TrainOpts base;
  std::string lr_grid = "0.1,0.01,0.001";
  std::string lambda_grid = "0.01,0.1,1.0";
  std::string t_in_grid = "-9,-7,-5";
  std::string t_out_grid = "-1,-2,-3,-4";
};

int run_sweep(const SweepOpts& o) {
  if (o.base.benchmark.empty()) throw std::invalid_argument("sweep: --benchmark is required");
  if (o.base.out.empty()) throw std::invalid_argument("sweep: --out is required");
  const gnnsafe::Benchmark bench = gnnsafe::load_benchmark(o.base.benchmark);
  const gnnsafe::EncoderConfig enc_cfg = to_encoder_config(o.base, bench.id_graph->num_classes);
  const gnnsafe::TrainConfig base_tc = to_train_config(o.base);
  gnnsafe::GridSpec grids;
  grids.lrs = parse_double_list(o.lr_grid, "--lr-grid");
  grids.lambdas = parse_double_list(o.lambda_grid, "--lambda-grid");
  grids.t_ins = parse_double_list(o.t_in_grid, "--t-in-grid");
  grids.t_outs = parse_double_list(o.t_out_grid, "--t-out-grid");

  const gnnsafe::GridResult result =
      gnnsafe::grid_search(bench, enc_cfg, base_tc, grids, env_threads());

  fs::create_directories(o.base.out);
  gnnsafe::write_grid_csv(result.rows, fs::path(o.base.out) / "grid.csv");
  gnnsafe::Checkpoint ck{enc_cfg, bench.id_graph->num_features(), o.base.seed, bench.class_remap,
                         result.best_run.params};
  gnnsafe::save_checkpoint(ck, o.base.out);
  gnnsafe::write_train_log(result.best_run.history, fs::path(o.base.out) / "train_log.jsonl");

  ordered_json resolved = train_resolved(o.base, "sweep");
  resolved.erase("lr");
  resolved.erase("lambda");
  resolved.erase("t_in");
  resolved.erase("t_out");
  resolved["lr_grid"] = grids.lrs;
  resolved["lambda_grid"] = grids.lambdas;
  resolved["t_in_grid"] = grids.t_ins;
  resolved["t_out_grid"] = grids.t_outs;
  resolved["best"] = {{"lr", result.best_config.lr},
                      {"lambda", result.best_config.lambda},
                      {"t_in", result.best_config.t_in},
                      {"t_out", result.best_config.t_out},
                      {"val_loss", result.best_run.history.best_val_loss}};
  write_resolved_config(o.base.out, resolved);
  std::printf("sweep: %zu runs, best lr=%g lambda=%g t_in=%g t_out=%g val_loss=%.6f\n",
              result.rows.size(), result.best_config.lr, result.best_config.lambda,
              result.best_config.t_in, result.best_config.t_out,
              result.best_run.history.best_val_loss);
  return 0;
}

void add_train_flags(CLI::App* cmd, TrainOpts& o, ConfigMerger& merger, bool with_point_params) {
  cmd->add_option("--benchmark", o.benchmark, "Benchmark directory");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--epochs", o.epochs, "Training epochs");
  cmd->add_option("--alpha", o.alpha, "Propagation self weight");
  cmd->add_option("--k", o.k, "Propagation steps");
  cmd->add_option("--weight-decay", o.weight_decay, "Decoupled weight decay");
  cmd->add_flag("--regularize", o.regularize, "Enable the energy regularizer");
  cmd->add_option("--encoder", o.encoder, "Encoder kind: gcn or mlp");
  cmd->add_option("--layers", o.layers, "Encoder layers");
  cmd->add_option("--hidden", o.hidden, "Hidden width");
  cmd->add_flag("--no-feature-norm", o.no_feature_norm, "Disable feature normalization");
  merger.bind("benchmark", "--benchmark", &o.benchmark);
  merger.bind("out", "--out", &o.out);
  merger.bind("seed", "--seed", &o.seed);
  merger.bind("epochs", "--epochs", &o.epochs);
  merger.bind("alpha", "--alpha", &o.alpha);
  merger.bind("k", "--k", &o.k);
  merger.bind("weight_decay", "--weight-decay", &o.weight_decay);
  merger.bind("regularize", "--regularize", &o.regularize);
  merger.bind("encoder", "--encoder", &o.encoder);
  merger.bind("layers", "--layers", &o.layers);
  merger.bind("hidden", "--hidden", &o.hidden);
  merger.bind("no_feature_norm", "--no-feature-norm", &o.no_feature_norm);
  if (with_point_params) {
    cmd->add_option("--lr", o.lr, "Learning rate");
    cmd->add_option("--lambda", o.lambda, "Regularizer weight");
    cmd->add_option("--t-in", o.t_in, "In-distribution energy bound");
    cmd->add_option("--t-out", o.t_out, "OOD energy bound");
    merger.bind("lr", "--lr", &o.lr);
    merger.bind("lambda", "--lambda", &o.lambda);
    merger.bind("t_in", "--t-in", &o.t_in);
    merger.bind("t_out", "--t-out", &o.t_out);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-based OOD detection for node classification"};
  app.require_subcommand(1);

  GenOpts gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "Generate a benchmark directory");
  gen_cmd->add_option("--config", gen.config, "JSON config file");
  ConfigMerger gen_merger(gen_cmd, &gen.config);
  gen_cmd->add_option("--dataset", gen.dataset, "Dataset directory");
  gen_cmd->add_option("--out", gen.out, "Output benchmark directory");
  gen_cmd->add_option("--scenario", gen.scenario,
                      "structure | feature | label_leaveout | multigraph | as_is");
  gen_cmd->add_option("--seed", gen.seed, "Master seed");
  gen_cmd->add_option("--homophily", gen.homophily, "SBM p_in/p_out ratio");
  gen_cmd->add_option("--leave-out", gen.leave_out_csv, "Comma list of left-out classes");
  gen_cmd->add_option("--ratios", gen.ratios_csv, "train,valid,test fractions");
  gen_cmd->add_option("--ood-dataset", gen.ood_datasets, "OOD dataset directory (repeatable)");
  gen_cmd->add_option("--exposure-dataset", gen.exposure_dataset, "Exposure dataset directory");
  gen_cmd->add_option("--masks", gen.masks, "JSON mask file for as_is");
  gen_cmd->add_flag("--no-exposure", gen.no_exposure, "Skip the exposure unit");
  gen_merger.bind("dataset", "--dataset", &gen.dataset);
  gen_merger.bind("out", "--out", &gen.out);
  gen_merger.bind("scenario", "--scenario", &gen.scenario);
  gen_merger.bind("seed", "--seed", &gen.seed);
  gen_merger.bind("homophily", "--homophily", &gen.homophily);
  gen_merger.bind("leave_out", "--leave-out", &gen.leave_out_csv);
  gen_merger.bind("ratios", "--ratios", &gen.ratios_csv);
  gen_merger.bind("ood_datasets", "--ood-dataset", &gen.ood_datasets);
  gen_merger.bind("exposure_dataset", "--exposure-dataset", &gen.exposure_dataset);
  gen_merger.bind("masks", "--masks", &gen.masks);
  gen_merger.bind("no_exposure", "--no-exposure", &gen.no_exposure);

  TrainOpts train;
  CLI::App* train_cmd = app.add_subcommand("train", "Train an encoder on a benchmark");
  train_cmd->add_option("--config", train.config, "JSON config file");
  ConfigMerger train_merger(train_cmd, &train.config);
  add_train_flags(train_cmd, train, train_merger, true);

  EvalOpts eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a benchmark");
  eval_cmd->add_option("--config", eval.config, "JSON config file");
  ConfigMerger eval_merger(eval_cmd, &eval.config);
  eval_cmd->add_option("--benchmark", eval.benchmark, "Benchmark directory");
  eval_cmd->add_option("--model", eval.model, "Checkpoint directory");
  eval_cmd->add_option("--out", eval.out, "Output directory");
  eval_cmd->add_option("--k", eval.k, "Propagation steps (0 = raw energy)");
  eval_cmd->add_option("--alpha", eval.alpha, "Propagation self weight");
  eval_cmd->add_option("--score", eval.score, "energy | msp");
  eval_merger.bind("benchmark", "--benchmark", &eval.benchmark);
  eval_merger.bind("model", "--model", &eval.model);
  eval_merger.bind("out", "--out", &eval.out);
  eval_merger.bind("k", "--k", &eval.k);
  eval_merger.bind("alpha", "--alpha", &eval.alpha);
  eval_merger.bind("score", "--score", &eval.score);

  SweepOpts sweep;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Grid-search training hyperparameters");
  sweep_cmd->add_option("--config", sweep.base.config, "JSON config file");
  ConfigMerger sweep_merger(sweep_cmd, &sweep.base.config);
  add_train_flags(sweep_cmd, sweep.base, sweep_merger, false);
  sweep_cmd->add_option("--lr-grid", sweep.lr_grid, "Comma list of learning rates");
  sweep_cmd->add_option("--lambda-grid", sweep.lambda_grid, "Comma list of lambdas");
  sweep_cmd->add_option("--t-in-grid", sweep.t_in_grid, "Comma list of t_in bounds");
  sweep_cmd->add_option("--t-out-grid", sweep.t_out_grid, "Comma list of t_out bounds");
  sweep_merger.bind("lr_grid", "--lr-grid", &sweep.lr_grid);
  sweep_merger.bind("lambda_grid", "--lambda-grid", &sweep.lambda_grid);
  sweep_merger.bind("t_in_grid", "--t-in-grid", &sweep.t_in_grid);
  sweep_merger.bind("t_out_grid", "--t-out-grid", &sweep.t_out_grid);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 2;
  }

  try {
    if (gen_cmd->parsed()) {
      gen_merger.apply();
      return run_gen(gen);
    }
    if (train_cmd->parsed()) {
      train_merger.apply();
      return run_train(train);
    }
    if (eval_cmd->parsed()) {
      eval_merger.apply();
      return run_eval(eval);
    }
    if (sweep_cmd->parsed()) {
      sweep_merger.apply();
      return run_sweep(sweep);
    }
  } catch (const gnnsafe::NumericError& e) {
    if (e.epoch() >= 0)
      std::cerr << "numeric error at epoch " << e.epoch() << ": " << e.what() << "\n";
    else
      std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const gnnsafe::FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
