#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gnnsafe/graph.hpp"
#include "gnnsafe/rng.hpp"

namespace gnnsafe {

struct GenOptions {
  double homophily = 5.0;  // p_in / p_out for the structure scenario
  bool with_exposure = true;
  double train_frac = 0.1, valid_frac = 0.1, test_frac = 0.8;
  std::optional<Splits> splits;  // caller-supplied; otherwise generated
};

struct SbmParams {
  double p_in = 0.0, p_out = 0.0;
};

/// Intra/inter edge probabilities whose expected edge count matches
/// `target_edges` at the given homophily ratio p_in/p_out, clamped to [0,1].
inline SbmParams compute_sbm_params(const std::vector<std::int32_t>& blocks,
                                    std::size_t num_blocks, std::size_t target_edges,
                                    double homophily) {
  if (homophily <= 0.0) throw std::invalid_argument("compute_sbm_params: homophily must be > 0");
  std::vector<std::size_t> sizes(num_blocks, 0);
  for (const std::int32_t b : blocks) {
    if (b < 0 || static_cast<std::size_t>(b) >= num_blocks)
      throw std::invalid_argument("compute_sbm_params: block id out of range");
    ++sizes[static_cast<std::size_t>(b)];
  }
  const std::size_t n = blocks.size();
  double intra_pairs = 0.0;
  for (const std::size_t s : sizes)
    intra_pairs += static_cast<double>(s) * static_cast<double>(s - (s > 0 ? 1 : 0)) / 2.0;
  const double total_pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  const double inter_pairs = total_pairs - intra_pairs;
  const double denom = homophily * intra_pairs + inter_pairs;
  SbmParams p;
  if (denom > 0.0) {
    p.p_out = static_cast<double>(target_edges) / denom;
    p.p_in = homophily * p.p_out;
  }
  p.p_out = std::min(1.0, std::max(0.0, p.p_out));
  p.p_in = std::min(1.0, std::max(0.0, p.p_in));
  return p;
}

/// Samples an undirected stochastic block model: one Bernoulli draw per node
/// pair (i < j, row-major order) so the edge set is a pure function of seed.
inline std::vector<std::pair<std::size_t, std::size_t>> sbm_edges(
    const std::vector<std::int32_t>& blocks, double p_in, double p_out, std::uint64_t seed) {
  if (p_in < 0.0 || p_in > 1.0 || p_out < 0.0 || p_out > 1.0)
    throw std::invalid_argument("sbm_edges: probabilities must lie in [0,1]");
  Rng rng(seed);
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  const std::size_t n = blocks.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double p = blocks[i] == blocks[j] ? p_in : p_out;
      if (rng.uniform() < p) edges.emplace_back(i, j);
    }
  }
  return edges;
}

namespace detail {

inline Splits splits_for(const Graph& g, std::uint64_t seed, const GenOptions& opt) {
  if (opt.splits) {
    Splits s = *opt.splits;
    s.validate(g);
    return s;
  }
  return make_splits(g, opt.train_frac, opt.valid_frac, opt.test_frac,
                     derive_seed(seed, "splits"));
}

/// Blocks for the SBM: ground-truth classes, with unlabeled nodes assigned a
/// seeded random block so every node participates.
inline std::vector<std::int32_t> sbm_blocks(const Graph& g, std::uint64_t seed) {
  std::vector<std::int32_t> blocks = g.labels;
  Rng rng(derive_seed(seed, "blocks"));
  for (auto& b : blocks)
    if (b < 0) b = static_cast<std::int32_t>(rng.bounded(g.num_classes));
  return blocks;
}

inline std::shared_ptr<const Graph> sbm_rewire(const Graph& g, double homophily,
                                               std::uint64_t seed) {
  const std::vector<std::int32_t> blocks = sbm_blocks(g, seed);
  const SbmParams p = compute_sbm_params(blocks, g.num_classes, g.num_edges(), homophily);
  auto ood = std::make_shared<Graph>();
  ood->num_nodes = g.num_nodes;
  ood->features = g.features;  // structure manipulation keeps features
  ood->labels = g.labels;
  ood->num_classes = g.num_classes;
  ood->name = g.name + "_sbm";
  ood->adjacency =
      build_adjacency(g.num_nodes, sbm_edges(blocks, p.p_in, p.p_out, derive_seed(seed, "sbm")));
  return ood;
}

inline std::vector<std::size_t> full_mask(std::size_t n) {
  std::vector<std::size_t> m(n);
  for (std::size_t i = 0; i < n; ++i) m[i] = i;
  return m;
}

}  // namespace detail

/// Structure-manipulation benchmark: OOD nodes keep the original features but
/// live on an SBM-rewired copy of the graph (blocks = label classes). The
/// exposure unit, when requested, is an independent rewire from seed^1.
inline Benchmark gen_structure_ood(std::shared_ptr<const Graph> g, std::uint64_t seed,
                                   const GenOptions& opt = {}) {
  g->validate();
  if (g->num_classes < 2)
    throw std::invalid_argument("gen_structure_ood: need at least 2 classes");
  Benchmark b;
  b.id_graph = g;
  b.splits = detail::splits_for(*g, seed, opt);
  auto ood = detail::sbm_rewire(*g, opt.homophily, seed);
  b.ood_test.push_back({ood, detail::full_mask(ood->num_nodes)});
  if (opt.with_exposure) {
    auto expo = detail::sbm_rewire(*g, opt.homophily, seed ^ 1);
    b.ood_exposure = OODUnit{expo, detail::full_mask(expo->num_nodes)};
  }
  b.validate();
  return b;
}

/// Row i of the result is lambda_i * x_i + (1 - lambda_i) * x_{perm(i)}.
inline DenseMatrix interpolate_features(const DenseMatrix& x,
                                        const std::vector<std::size_t>& perm,
                                        const std::vector<double>& lambdas) {
  if (perm.size() != x.rows() || lambdas.size() != x.rows())
    throw std::invalid_argument("interpolate_features: size mismatch");
  DenseMatrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    if (perm[i] >= x.rows()) throw std::invalid_argument("interpolate_features: bad permutation");
    const double lam = lambdas[i];
    const double* a = x.row(i);
    const double* b = x.row(perm[i]);
    double* o = out.row(i);
    for (std::size_t d = 0; d < x.cols(); ++d) o[d] = lam * a[d] + (1.0 - lam) * b[d];
  }
  return out;
}

namespace detail {

inline std::shared_ptr<const Graph> interpolated_copy(const Graph& g, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "interp"));
  const std::vector<std::size_t> perm = rng.permutation(g.num_nodes);
  std::vector<double> lambdas(g.num_nodes);
  for (auto& l : lambdas) l = rng.uniform();
  auto ood = std::make_shared<Graph>();
  ood->num_nodes = g.num_nodes;
  ood->adjacency = g.adjacency;  // feature manipulation keeps structure
  ood->features = interpolate_features(g.features, perm, lambdas);
  ood->labels = g.labels;
  ood->num_classes = g.num_classes;
  ood->name = g.name + "_interp";
  return ood;
}

}  // namespace detail

/// Feature-interpolation benchmark: OOD nodes keep the original structure but
/// mix each node's features with a random partner's.
inline Benchmark gen_feature_ood(std::shared_ptr<const Graph> g, std::uint64_t seed,
                                 const GenOptions& opt = {}) {
  g->validate();
  if (g->num_nodes == 0) throw std::invalid_argument("gen_feature_ood: empty graph");
  Benchmark b;
  b.id_graph = g;
  b.splits = detail::splits_for(*g, seed, opt);
  auto ood = detail::interpolated_copy(*g, seed);
  b.ood_test.push_back({ood, detail::full_mask(ood->num_nodes)});
  if (opt.with_exposure) {
    auto expo = detail::interpolated_copy(*g, seed ^ 1);
    b.ood_exposure = OODUnit{expo, detail::full_mask(expo->num_nodes)};
  }
  b.validate();
  return b;
}

/// Default leave-out set: the highest-index ceil(C/4) classes.
inline std::vector<std::int32_t> default_leave_out(std::size_t num_classes) {
  const std::size_t k = (num_classes + 3) / 4;
  std::vector<std::int32_t> out;
  for (std::size_t c = num_classes - k; c < num_classes; ++c)
    out.push_back(static_cast<std::int32_t>(c));
  return out;
}

/// Label leave-out benchmark: a single graph where nodes of the left-out
/// classes become the OOD unit (labels erased) and the remaining classes are
/// remapped to 0..C'-1. No exposure unit exists for this scenario: every
/// known-OOD node already belongs to the test mask and the two sets must stay
/// disjoint.
inline Benchmark gen_label_leaveout_ood(std::shared_ptr<const Graph> g,
                                        const std::vector<std::int32_t>& leave_out,
                                        std::uint64_t seed, const GenOptions& opt = {}) {
  g->validate();
  const std::set<std::int32_t> out_set(leave_out.begin(), leave_out.end());
  for (const std::int32_t c : out_set)
    if (c < 0 || c >= static_cast<std::int32_t>(g->num_classes))
      throw std::invalid_argument("gen_label_leaveout_ood: class id out of range");
  if (out_set.empty() || out_set.size() + 2 > g->num_classes)
    throw std::invalid_argument(
        "gen_label_leaveout_ood: leave_out must keep at least 2 classes and drop at least 1");

  std::vector<std::int32_t> remap(g->num_classes, -1);
  std::int32_t next = 0;
  for (std::size_t c = 0; c < g->num_classes; ++c)
    if (!out_set.count(static_cast<std::int32_t>(c))) remap[c] = next++;

  auto kept = std::make_shared<Graph>();
  kept->num_nodes = g->num_nodes;
  kept->adjacency = g->adjacency;
  kept->features = g->features;
  kept->num_classes = g->num_classes - out_set.size();
  kept->name = g->name + "_leaveout";
  kept->labels.resize(g->num_nodes);
  std::vector<std::size_t> ood_mask;
  for (std::size_t i = 0; i < g->num_nodes; ++i) {
    const std::int32_t y = g->labels[i];
    if (y >= 0 && out_set.count(y)) {
      kept->labels[i] = -1;
      ood_mask.push_back(i);
    } else {
      kept->labels[i] = y < 0 ? -1 : remap[y];
    }
  }
  if (ood_mask.empty())
    throw std::invalid_argument("gen_label_leaveout_ood: no node carries a left-out class");

  Benchmark b;
  b.id_graph = kept;
  b.splits = detail::splits_for(*kept, seed, opt);
  b.ood_test.push_back({kept, std::move(ood_mask)});
  b.class_remap = std::move(remap);
  b.validate();
  return b;
}

/// Multi-graph benchmark: every node of each OOD graph is an OOD instance;
/// the optional exposure graph becomes the exposure unit (full mask).
inline Benchmark assemble_benchmark(std::shared_ptr<const Graph> id_graph, Splits splits,
                                    std::vector<std::shared_ptr<const Graph>> ood_graphs,
                                    std::shared_ptr<const Graph> exposure = nullptr) {
  id_graph->validate();
  Benchmark b;
  b.id_graph = std::move(id_graph);
  b.splits = std::move(splits);
  b.splits.validate(*b.id_graph);
  for (auto& g : ood_graphs) {
    g->validate();
    if (g->num_features() != b.id_graph->num_features())
      throw std::invalid_argument("assemble_benchmark: ood graph feature dimension mismatch");
    const std::size_t n = g->num_nodes;
    b.ood_test.push_back({std::move(g), detail::full_mask(n)});
  }
  if (exposure) {
    exposure->validate();
    if (exposure->num_features() != b.id_graph->num_features())
      throw std::invalid_argument("assemble_benchmark: exposure feature dimension mismatch");
    const std::size_t n = exposure->num_nodes;
    b.ood_exposure = OODUnit{std::move(exposure), detail::full_mask(n)};
  }
  b.validate();
  return b;
}

}  // namespace gnnsafe
