#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "gnnsafe/encoder.hpp"
#include "gnnsafe/energy.hpp"
#include "gnnsafe/graph.hpp"
#include "gnnsafe/metrics.hpp"

namespace gnnsafe {

enum class ScoreKind { energy, msp };

inline std::string to_string(ScoreKind s) { return s == ScoreKind::energy ? "energy" : "msp"; }

inline ScoreKind score_kind_from(const std::string& s) {
  if (s == "energy") return ScoreKind::energy;
  if (s == "msp") return ScoreKind::msp;
  throw std::invalid_argument("unknown score kind '" + s + "'");
}

struct UnitMetrics {
  std::string name;
  std::size_t n_ood = 0;
  double auroc = 0.0, aupr = 0.0, fpr95 = 0.0;
};

struct DetectionReport {
  std::string score = "energy";
  double alpha = 0.5;
  std::size_t k = 2;
  double tau = 0.0;
  double id_test_accuracy = 0.0;
  std::size_t n_id_test = 0, n_ood_total = 0;
  std::vector<UnitMetrics> units;
  double mean_auroc = 0.0, mean_aupr = 0.0, mean_fpr95 = 0.0;
};

/// One score-dump row per evaluated node: id-test nodes first (truth 0), then
/// the unit's masked nodes (truth 1).
struct ScoreRow {
  std::size_t node_id = 0;
  double raw_energy = 0.0, propagated_energy = 0.0, msp = 0.0;
  int is_ood_truth = 0;
};

struct UnitScores {
  std::string name;
  std::vector<ScoreRow> rows;
};

/// Runs the detector over a benchmark: forward each distinct graph once,
/// score s = -propagated energy (or MSP) with in-distribution as the positive
/// class, per-unit AUROC/AUPR/FPR95 plus unweighted means, id-test accuracy,
/// and the 95%-TPR-calibrated tau from validation energies.
inline DetectionReport evaluate(const Benchmark& bench, const EncoderParams& params,
                                const EncoderConfig& enc_cfg, double alpha, std::size_t k,
                                ScoreKind score = ScoreKind::energy,
                                std::vector<UnitScores>* dumps = nullptr) {
  bench.validate();
  enc_cfg.validate();
  const bool gcn = enc_cfg.kind == EncoderKind::gcn;

  struct GraphScores {
    DenseMatrix logits;
    std::vector<double> raw, propagated, msp;
  };
  std::map<const Graph*, GraphScores> per_graph;
  const auto scores_of = [&](const Graph& g) -> const GraphScores& {
    if (auto it = per_graph.find(&g); it != per_graph.end()) return it->second;
    SparseMatrix norm_adj;
    if (gcn) norm_adj = sym_normalize(g.adjacency, true);
    ForwardCache cache = forward(params, enc_cfg, g.features, &norm_adj);
    GraphScores s;
    const EnergyVector raw = node_energy(cache.logits);
    s.raw = raw.values;
    s.propagated = propagate_energy(raw, g.adjacency, alpha, k).values;
    s.msp = msp_score(cache.logits);
    s.logits = std::move(cache.logits);
    return per_graph.emplace(&g, std::move(s)).first->second;
  };

  const Graph& id = *bench.id_graph;
  const GraphScores& id_scores = scores_of(id);
  const auto pick = [&](const GraphScores& s, std::size_t i) {
    return score == ScoreKind::energy ? -s.propagated[i] : s.msp[i];
  };
  std::vector<double> pos;
  pos.reserve(bench.splits.test.size());
  for (const std::size_t i : bench.splits.test) pos.push_back(pick(id_scores, i));

  DetectionReport report;
  report.score = to_string(score);
  report.alpha = alpha;
  report.k = k;
  report.n_id_test = bench.splits.test.size();
  if (dumps) dumps->clear();

  for (std::size_t u = 0; u < bench.ood_test.size(); ++u) {
    const OODUnit& unit = bench.ood_test[u];
    const GraphScores& gs = scores_of(*unit.graph);
    std::vector<double> neg;
    neg.reserve(unit.ood_mask.size());
    for (const std::size_t i : unit.ood_mask) neg.push_back(pick(gs, i));
    UnitMetrics m;
    m.name = "ood_test_" + std::to_string(u);
    m.n_ood = unit.ood_mask.size();
    m.auroc = auroc(pos, neg);
    m.aupr = aupr(pos, neg);
    m.fpr95 = fpr_at_tpr(pos, neg);
    report.n_ood_total += m.n_ood;
    report.units.push_back(m);
    if (dumps) {
      UnitScores dump;
      dump.name = m.name;
      for (const std::size_t i : bench.splits.test)
        dump.rows.push_back({i, id_scores.raw[i], id_scores.propagated[i], id_scores.msp[i], 0});
      for (const std::size_t i : unit.ood_mask)
        dump.rows.push_back({i, gs.raw[i], gs.propagated[i], gs.msp[i], 1});
      dumps->push_back(std::move(dump));
    }
  }
  const double n_units = static_cast<double>(report.units.size());
  for (const UnitMetrics& m : report.units) {
    report.mean_auroc += m.auroc / n_units;
    report.mean_aupr += m.aupr / n_units;
    report.mean_fpr95 += m.fpr95 / n_units;
  }

  std::vector<std::size_t> test_labeled;
  for (const std::size_t i : bench.splits.test)
    if (id.labels[i] >= 0) test_labeled.push_back(i);
  if (test_labeled.empty()) throw std::invalid_argument("evaluate: no labeled test nodes");
  report.id_test_accuracy = accuracy(id_scores.logits, id.labels, test_labeled);
  std::vector<double> val_energies;
  for (const std::size_t i : bench.splits.valid) val_energies.push_back(id_scores.propagated[i]);
  report.tau = calibrate_tau(std::move(val_energies));
  return report;
}

/// Exact column order: node_id,raw_energy,propagated_energy,msp,is_ood_truth.
/// %.17g round-trips every double.
inline void write_unit_scores_csv(const UnitScores& scores, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << "node_id,raw_energy,propagated_energy,msp,is_ood_truth\n";
  char buf[512];
  for (const ScoreRow& r : scores.rows) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%d\n", r.node_id, r.raw_energy,
                  r.propagated_energy, r.msp, r.is_ood_truth);
    out << buf;
  }
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

/// report.json body. `config_echo` carries the resolved invocation and
/// `timestamp` is confined to the meta object so byte comparisons can ignore
/// it.
inline nlohmann::ordered_json report_to_json(const DetectionReport& r,
                                             const nlohmann::ordered_json& config_echo,
                                             const std::string& timestamp) {
  nlohmann::ordered_json j;
  j["meta"] = {{"tool", "gnnsafe"}, {"timestamp", timestamp}};
  j["config"] = config_echo;
  j["score"] = r.score;
  j["alpha"] = r.alpha;
  j["k"] = r.k;
  j["tau"] = r.tau;
  j["id_test_accuracy"] = r.id_test_accuracy;
  j["counts"] = {{"id_test", r.n_id_test}, {"ood_total", r.n_ood_total}};
  j["units"] = nlohmann::ordered_json::array();
  for (const UnitMetrics& u : r.units)
    j["units"].push_back({{"name", u.name},
                          {"n_ood", u.n_ood},
                          {"auroc", u.auroc},
                          {"aupr", u.aupr},
                          {"fpr95", u.fpr95}});
  j["aggregate"] = {{"auroc", r.mean_auroc}, {"aupr", r.mean_aupr}, {"fpr95", r.mean_fpr95}};
  return j;
}

}  // namespace gnnsafe
