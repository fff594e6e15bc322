#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"

#include "gnnsafe/encoder.hpp"
#include "gnnsafe/energy.hpp"
#include "gnnsafe/errors.hpp"
#include "gnnsafe/graph.hpp"
#include "gnnsafe/metrics.hpp"

namespace gnnsafe {

struct TrainConfig {
  double lr = 0.01;
  std::size_t epochs = 200;
  double lambda = 1.0;
  double t_in = -7.0;
  double t_out = -2.0;
  double alpha = 0.5;
  std::size_t K = 2;
  double weight_decay = 0.0;  // decoupled, weight matrices only
  std::uint64_t seed = 0;
  bool use_regularization = false;

  void validate() const {
    if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
    if (!(lr > 0.0)) throw std::invalid_argument("TrainConfig: lr must be > 0");
    if (lambda < 0.0) throw std::invalid_argument("TrainConfig: lambda must be >= 0");
    if (!(alpha > 0.0 && alpha <= 1.0))
      throw std::invalid_argument("TrainConfig: alpha must lie in (0, 1]");
    if (weight_decay < 0.0) throw std::invalid_argument("TrainConfig: weight_decay must be >= 0");
    if (use_regularization && !(t_in < t_out))
      throw std::invalid_argument("TrainConfig: t_in must be < t_out");
  }
};

struct SupLoss {
  double sum = 0.0;   // optimized (Eq-style sum over the mask)
  double mean = 0.0;  // logged
  DenseMatrix grad;   // w.r.t. logits; rows outside the mask stay zero
};

/// Negative log-likelihood over the masked nodes. grad[i,c] =
/// softmax(logits_i)[c] - 1{c = y_i} inside the mask.
inline SupLoss sup_loss(const DenseMatrix& logits, const std::vector<std::int32_t>& labels,
                        const std::vector<std::size_t>& mask) {
  if (mask.empty()) throw std::invalid_argument("sup_loss: empty mask");
  SupLoss out;
  out.grad = DenseMatrix(logits.rows(), logits.cols());
  for (const std::size_t i : mask) {
    const std::int32_t y = labels[i];
    if (y < 0) throw std::invalid_argument("sup_loss: unlabeled node in mask");
    const double* r = logits.row(i);
    double mx = r[0];
    for (std::size_t c = 1; c < logits.cols(); ++c) mx = std::max(mx, r[c]);
    double z = 0.0;
    for (std::size_t c = 0; c < logits.cols(); ++c) z += std::exp(r[c] - mx);
    const double lse = mx + std::log(z);
    out.sum += lse - r[static_cast<std::size_t>(y)];
    double* g = out.grad.row(i);
    for (std::size_t c = 0; c < logits.cols(); ++c) g[c] = std::exp(r[c] - mx) / z;
    g[static_cast<std::size_t>(y)] -= 1.0;
  }
  out.mean = out.sum / static_cast<double>(mask.size());
  return out;
}

struct RegLoss {
  double loss = 0.0;
  std::vector<double> grad_id;   // d loss / d (propagated energy), id side
  std::vector<double> grad_ood;  // ood side
};

/// Bounded-energy regularizer on propagated energies:
/// (1/|I_s|) sum ReLU(E_i - t_in)^2 + (1/|I_o|) sum ReLU(t_out - E_j)^2.
inline RegLoss reg_loss(const std::vector<double>& e_id, const std::vector<double>& e_ood,
                        double t_in, double t_out) {
  if (!(t_in < t_out)) throw std::invalid_argument("reg_loss: t_in must be < t_out");
  if (e_id.empty() || e_ood.empty()) throw std::invalid_argument("reg_loss: empty energy set");
  RegLoss out;
  out.grad_id.assign(e_id.size(), 0.0);
  out.grad_ood.assign(e_ood.size(), 0.0);
  const double n_id = static_cast<double>(e_id.size());
  const double n_ood = static_cast<double>(e_ood.size());
  for (std::size_t i = 0; i < e_id.size(); ++i) {
    const double v = e_id[i] - t_in;
    if (v > 0.0) {
      out.loss += v * v / n_id;
      out.grad_id[i] = 2.0 * v / n_id;
    }
  }
  for (std::size_t j = 0; j < e_ood.size(); ++j) {
    const double v = t_out - e_ood[j];
    if (v > 0.0) {
      out.loss += v * v / n_ood;
      out.grad_ood[j] = -2.0 * v / n_ood;
    }
  }
  return out;
}

struct AdamState {
  std::vector<double> m, v;
  std::int64_t t = 0;
};

/// Bias-corrected Adam (beta1 0.9, beta2 0.999, eps 1e-8) with decoupled
/// weight decay applied only where decay_mask is set.
inline void adam_step(std::vector<double>& params, const std::vector<double>& grads,
                      AdamState& state, double lr, double weight_decay,
                      const std::vector<std::uint8_t>& decay_mask) {
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  if (params.size() != grads.size() || params.size() != decay_mask.size())
    throw std::invalid_argument("adam_step: size mismatch");
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size())
    throw std::invalid_argument("adam_step: state size mismatch");
  ++state.t;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * g;
    state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * g * g;
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    const double decay = decay_mask[i] ? weight_decay * params[i] : 0.0;
    params[i] -= lr * (mhat / (std::sqrt(vhat) + eps) + decay);
  }
}

struct TrainHistory {
  std::vector<double> train_loss;  // mean sup + lambda * reg, params at epoch start
  std::vector<double> val_loss;    // mean classification loss, params after the step
  std::vector<double> val_acc;
  std::vector<double> reg_loss;    // 0.0 when not regularizing
  std::size_t best_epoch = 0;      // 0-based index of the minimum val_loss
  double best_val_loss = std::numeric_limits<double>::infinity();
  double initial_train_energy_mean = 0.0;  // mean raw train energy, initial params
  double final_train_energy_mean = 0.0;    // same after the last epoch
};

struct TrainResult {
  EncoderParams params;  // snapshot from the best epoch
  TrainHistory history;
};

namespace detail {

inline std::vector<double> gather(const std::vector<double>& values,
                                  const std::vector<std::size_t>& idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (const std::size_t i : idx) out.push_back(values[i]);
  return out;
}

inline double mean_at(const std::vector<double>& values, const std::vector<std::size_t>& idx) {
  double acc = 0.0;
  for (const std::size_t i : idx) acc += values[i];
  return acc / static_cast<double>(idx.size());
}

inline std::vector<std::size_t> labeled_subset(const std::vector<std::size_t>& mask,
                                               const std::vector<std::int32_t>& labels) {
  std::vector<std::size_t> out;
  for (const std::size_t i : mask)
    if (labels[i] >= 0) out.push_back(i);
  return out;
}

}  // namespace detail

/// Full-batch training: L_sup on splits.train plus, when regularizing,
/// lambda * L_reg on propagated train/exposure energies. Validation
/// classification loss (after each step) picks the returned snapshot; ties go
/// to the earliest epoch. When every regularizer hinge is inactive the
/// exposure backward pass is skipped entirely, so the step is bit-identical
/// to a pure L_sup step.
inline TrainResult train(const Benchmark& bench, const EncoderConfig& enc_cfg,
                         const TrainConfig& tc) {
  bench.validate();
  enc_cfg.validate();
  tc.validate();
  const Graph& id = *bench.id_graph;
  if (enc_cfg.out_classes != id.num_classes)
    throw std::invalid_argument("train: encoder out_classes must equal the graph's num_classes");
  if (bench.splits.train.empty()) throw std::invalid_argument("train: empty train split");
  const std::vector<std::size_t> valid_labeled =
      detail::labeled_subset(bench.splits.valid, id.labels);
  if (valid_labeled.empty())
    throw std::invalid_argument("train: no labeled validation nodes");
  const bool regularize = tc.use_regularization;
  if (regularize && !bench.ood_exposure)
    throw std::invalid_argument("train: regularization requires an ood_exposure unit");

  const bool gcn = enc_cfg.kind == EncoderKind::gcn;
  SparseMatrix norm_adj_id, norm_adj_expo;
  if (gcn) norm_adj_id = sym_normalize(id.adjacency, true);
  const Graph* expo = regularize ? bench.ood_exposure->graph.get() : nullptr;
  if (regularize && gcn) norm_adj_expo = sym_normalize(expo->adjacency, true);

  EncoderParams params =
      init_params(enc_cfg, id.num_features(), derive_seed(tc.seed, "init"));
  std::vector<double> flat = flatten(params);
  const std::vector<std::uint8_t> decay_mask = weight_entry_mask(params);
  AdamState opt;

  TrainResult result;
  TrainHistory& hist = result.history;
  {
    const ForwardCache cache0 = forward(params, enc_cfg, id.features, &norm_adj_id);
    hist.initial_train_energy_mean =
        detail::mean_at(node_energy(cache0.logits).values, bench.splits.train);
  }

  for (std::size_t epoch = 1; epoch <= tc.epochs; ++epoch) {
    try {
      const ForwardCache cache = forward(params, enc_cfg, id.features, &norm_adj_id);
      const SupLoss sup = sup_loss(cache.logits, id.labels, bench.splits.train);
      DenseMatrix grad_logits = sup.grad;
      double reg_value = 0.0;
      EncoderGrads expo_grads;
      bool expo_active = false;

      if (regularize && tc.lambda > 0.0) {
        const EnergyVector e_id =
            propagate_energy(node_energy(cache.logits), id.adjacency, tc.alpha, tc.K);
        const ForwardCache expo_cache =
            forward(params, enc_cfg, expo->features, &norm_adj_expo);
        const EnergyVector e_ood =
            propagate_energy(node_energy(expo_cache.logits), expo->adjacency, tc.alpha, tc.K);
        const RegLoss rl = reg_loss(detail::gather(e_id.values, bench.splits.train),
                                    detail::gather(e_ood.values, bench.ood_exposure->ood_mask),
                                    tc.t_in, tc.t_out);
        reg_value = rl.loss;
        const auto any_nonzero = [](const std::vector<double>& v) {
          for (const double x : v)
            if (x != 0.0) return true;
          return false;
        };
        if (any_nonzero(rl.grad_id) || any_nonzero(rl.grad_ood)) {
          // Pull back through propagation, then through E = -logsumexp:
          // dE/dlogit[i,c] = -softmax(logits_i)[c].
          std::vector<double> g_prop(id.num_nodes, 0.0);
          for (std::size_t k = 0; k < bench.splits.train.size(); ++k)
            g_prop[bench.splits.train[k]] = tc.lambda * rl.grad_id[k];
          const std::vector<double> g_raw =
              propagate_pullback(g_prop, id.adjacency, tc.alpha, tc.K);
          const DenseMatrix sm = softmax_rows(cache.logits);
          for (std::size_t i = 0; i < grad_logits.rows(); ++i) {
            if (g_raw[i] == 0.0) continue;
            for (std::size_t c = 0; c < grad_logits.cols(); ++c)
              grad_logits(i, c) -= g_raw[i] * sm(i, c);
          }
          std::vector<double> g_prop_o(expo->num_nodes, 0.0);
          const auto& expo_mask = bench.ood_exposure->ood_mask;
          for (std::size_t k = 0; k < expo_mask.size(); ++k)
            g_prop_o[expo_mask[k]] = tc.lambda * rl.grad_ood[k];
          const std::vector<double> g_raw_o =
              propagate_pullback(g_prop_o, expo->adjacency, tc.alpha, tc.K);
          const DenseMatrix sm_o = softmax_rows(expo_cache.logits);
          DenseMatrix grad_logits_o(expo_cache.logits.rows(), expo_cache.logits.cols());
          for (std::size_t i = 0; i < grad_logits_o.rows(); ++i) {
            if (g_raw_o[i] == 0.0) continue;
            for (std::size_t c = 0; c < grad_logits_o.cols(); ++c)
              grad_logits_o(i, c) = -g_raw_o[i] * sm_o(i, c);
          }
          expo_grads = backward(expo_cache, params, enc_cfg, &norm_adj_expo, grad_logits_o);
          expo_active = true;
        }
      }

      const double train_loss =
          regularize ? sup.mean + tc.lambda * reg_value : sup.mean;
      if (!std::isfinite(train_loss))
        throw NumericError("non-finite training loss", static_cast<std::int64_t>(epoch));

      EncoderGrads grads = backward(cache, params, enc_cfg, &norm_adj_id, grad_logits);
      if (expo_active) accumulate(grads, expo_grads);
      adam_step(flat, flatten(grads), opt, tc.lr, tc.weight_decay, decay_mask);
      unflatten(params, flat);

      const ForwardCache vcache = forward(params, enc_cfg, id.features, &norm_adj_id);
      const SupLoss vsup = sup_loss(vcache.logits, id.labels, valid_labeled);
      if (!std::isfinite(vsup.mean))
        throw NumericError("non-finite validation loss", static_cast<std::int64_t>(epoch));
      hist.train_loss.push_back(train_loss);
      hist.reg_loss.push_back(reg_value);
      hist.val_loss.push_back(vsup.mean);
      hist.val_acc.push_back(accuracy(vcache.logits, id.labels, valid_labeled));
      if (vsup.mean < hist.best_val_loss) {
        hist.best_val_loss = vsup.mean;
        hist.best_epoch = epoch - 1;
        result.params = params;
      }
      if (epoch == tc.epochs)
        hist.final_train_energy_mean =
            detail::mean_at(node_energy(vcache.logits).values, bench.splits.train);
    } catch (const NumericError& e) {
      if (e.epoch() >= 0) throw;
      throw NumericError(e.what(), static_cast<std::int64_t>(epoch));
    }
  }
  return result;
}

struct GridSpec {
  std::vector<double> lrs{0.1, 0.01, 0.001};
  std::vector<double> lambdas{0.01, 0.1, 1.0};
  std::vector<double> t_ins{-9.0, -7.0, -5.0};
  std::vector<double> t_outs{-1.0, -2.0, -3.0, -4.0};
};

struct GridRow {
  double lr = 0.0, lambda = 0.0, t_in = 0.0, t_out = 0.0;
  std::size_t best_epoch = 0;  // 1-based in reports
  double val_loss = 0.0, val_acc = 0.0;
};

struct GridResult {
  TrainConfig best_config;
  TrainResult best_run;
  std::vector<GridRow> rows;  // full factorial, lr-major order
  std::size_t best_index = 0;
};

/// Trains every grid combination (lr-major nested order) and picks the run
/// with the lowest best-epoch validation classification loss, earliest row on
/// ties. Runs are independent, so `threads` > 1 only changes wall time.
inline GridResult grid_search(const Benchmark& bench, const EncoderConfig& enc_cfg,
                              const TrainConfig& base, const GridSpec& grids,
                              std::size_t threads = 1) {
  if (grids.lrs.empty() || grids.lambdas.empty() || grids.t_ins.empty() || grids.t_outs.empty())
    throw std::invalid_argument("grid_search: empty grid");
  std::vector<TrainConfig> combos;
  for (const double lr : grids.lrs)
    for (const double lambda : grids.lambdas)
      for (const double t_in : grids.t_ins)
        for (const double t_out : grids.t_outs) {
          TrainConfig tc = base;
          tc.lr = lr;
          tc.lambda = lambda;
          tc.t_in = t_in;
          tc.t_out = t_out;
          tc.validate();
          combos.push_back(tc);
        }

  std::vector<TrainResult> runs(combos.size());
  const auto run_one = [&](std::size_t i) { runs[i] = train(bench, enc_cfg, combos[i]); };
  if (threads <= 1) {
    for (std::size_t i = 0; i < combos.size(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const std::size_t n_workers = std::min(threads, combos.size());
    for (std::size_t w = 0; w < n_workers; ++w)
      pool.emplace_back([&]() {
        for (std::size_t i = next.fetch_add(1); i < combos.size(); i = next.fetch_add(1))
          run_one(i);
      });
    for (auto& t : pool) t.join();
  }

  GridResult out;
  out.rows.reserve(combos.size());
  for (std::size_t i = 0; i < combos.size(); ++i) {
    const TrainHistory& h = runs[i].history;
    out.rows.push_back({combos[i].lr, combos[i].lambda, combos[i].t_in, combos[i].t_out,
                        h.best_epoch + 1, h.best_val_loss, h.val_acc[h.best_epoch]});
    if (runs[i].history.best_val_loss < runs[out.best_index].history.best_val_loss) {
      out.best_index = i;
    }
  }
  out.best_config = combos[out.best_index];
  out.best_run = std::move(runs[out.best_index]);
  return out;
}

/// JSON-lines training log: one {epoch, train_loss, val_loss, val_acc} object
/// per epoch.
inline void write_train_log(const TrainHistory& hist, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  for (std::size_t e = 0; e < hist.train_loss.size(); ++e) {
    nlohmann::ordered_json line;
    line["epoch"] = e + 1;
    line["train_loss"] = hist.train_loss[e];
    line["val_loss"] = hist.val_loss[e];
    line["val_acc"] = hist.val_acc[e];
    out << line.dump() << "\n";
  }
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

/// Grid results CSV, one row per combination in run order.
inline void write_grid_csv(const std::vector<GridRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << "lr,lambda,t_in,t_out,best_epoch,val_loss,val_acc\n";
  char buf[512];
  for (const GridRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%zu,%.17g,%.17g\n", r.lr, r.lambda,
                  r.t_in, r.t_out, r.best_epoch, r.val_loss, r.val_acc);
    out << buf;
  }
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

}  // namespace gnnsafe
