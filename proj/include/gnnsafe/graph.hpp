#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gnnsafe/matrix.hpp"
#include "gnnsafe/rng.hpp"

namespace gnnsafe {

/// Immutable node-attributed graph: symmetric adjacency with zero diagonal,
/// row-major feature matrix, integer labels with -1 marking unlabeled nodes.
struct Graph {
  std::size_t num_nodes = 0;
  SparseMatrix adjacency;
  DenseMatrix features;
  std::vector<std::int32_t> labels;
  std::size_t num_classes = 0;
  std::string name;

  std::size_t num_features() const { return features.cols(); }

  std::size_t num_edges() const { return adjacency.nnz() / 2; }

  void validate() const {
    if (adjacency.rows() != num_nodes || adjacency.cols() != num_nodes)
      throw std::invalid_argument("Graph: adjacency size does not match num_nodes");
    if (features.rows() != num_nodes)
      throw std::invalid_argument("Graph: feature rows do not match num_nodes");
    if (labels.size() != num_nodes)
      throw std::invalid_argument("Graph: label count does not match num_nodes");
    for (const std::int32_t y : labels)
      if (y < -1 || y >= static_cast<std::int32_t>(num_classes))
        throw std::invalid_argument("Graph: label out of range");
    adjacency.validate();
    if (!adjacency.is_symmetric()) throw std::invalid_argument("Graph: adjacency not symmetric");
    for (std::size_t i = 0; i < num_nodes; ++i)
      if (adjacency.at(i, i) != 0.0) throw std::invalid_argument("Graph: self-loop stored");
    if (!features.all_finite()) throw std::invalid_argument("Graph: non-finite feature");
  }

  std::vector<std::size_t> labeled_nodes() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < num_nodes; ++i)
      if (labels[i] >= 0) out.push_back(i);
    return out;
  }
};

/// Builds a symmetric, de-duplicated, loop-free adjacency from an undirected
/// edge list (each pair stored in both directions with weight 1).
inline SparseMatrix build_adjacency(std::size_t num_nodes,
                                    const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::vector<std::pair<std::size_t, std::size_t>> dedup;
  dedup.reserve(edges.size());
  for (const auto& [s, d] : edges) {
    if (s >= num_nodes || d >= num_nodes)
      throw std::invalid_argument("build_adjacency: edge endpoint out of range");
    if (s == d) continue;
    dedup.emplace_back(std::min(s, d), std::max(s, d));
  }
  std::sort(dedup.begin(), dedup.end());
  dedup.erase(std::unique(dedup.begin(), dedup.end()), dedup.end());
  std::vector<Triplet> t;
  t.reserve(2 * dedup.size());
  for (const auto& [a, b] : dedup) {
    t.push_back({a, b, 1.0});
    t.push_back({b, a, 1.0});
  }
  return SparseMatrix::from_triplets(num_nodes, num_nodes, std::move(t));
}

/// Canonical undirected edge list (i < j, lexicographic) of an adjacency.
inline std::vector<std::pair<std::size_t, std::size_t>> edge_list(const SparseMatrix& adj) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < adj.rows(); ++i)
    for (std::size_t k = adj.row_ptr()[i]; k < adj.row_ptr()[i + 1]; ++k)
      if (i < adj.col_idx()[k]) out.emplace_back(i, adj.col_idx()[k]);
  return out;
}

/// Disjoint train/valid/test node-index sets, stored sorted ascending.
struct Splits {
  std::vector<std::size_t> train, valid, test;

  void validate(const Graph& g) const {
    std::vector<std::uint8_t> seen(g.num_nodes, 0);
    const auto check = [&](const std::vector<std::size_t>& part, const char* which) {
      for (const std::size_t i : part) {
        if (i >= g.num_nodes) throw std::invalid_argument(std::string("Splits: ") + which +
                                                          " index out of range");
        if (seen[i]) throw std::invalid_argument("Splits: node in more than one part");
        seen[i] = 1;
      }
    };
    check(train, "train");
    check(valid, "valid");
    check(test, "test");
    for (const std::size_t i : train)
      if (g.labels[i] < 0) throw std::invalid_argument("Splits: unlabeled node in train");
  }
};

/// Partitions the labeled nodes by a seeded shuffle. Train and valid sizes
/// are floors of their fractions; the remainder goes to test.
inline Splits make_splits(const Graph& g, double train_frac, double valid_frac, double test_frac,
                          std::uint64_t seed) {
  if (std::abs(train_frac + valid_frac + test_frac - 1.0) > 1e-9)
    throw std::invalid_argument("make_splits: ratios must sum to 1");
  if (train_frac < 0.0 || valid_frac < 0.0 || test_frac < 0.0)
    throw std::invalid_argument("make_splits: negative ratio");
  std::vector<std::size_t> labeled = g.labeled_nodes();
  if (labeled.size() < 3) throw std::invalid_argument("make_splits: fewer than 3 labeled nodes");
  Rng rng(seed);
  rng.shuffle(labeled);
  const std::size_t n = labeled.size();
  const auto n_train = static_cast<std::size_t>(static_cast<double>(n) * train_frac);
  const auto n_valid = static_cast<std::size_t>(static_cast<double>(n) * valid_frac);
  Splits s;
  s.train.assign(labeled.begin(), labeled.begin() + n_train);
  s.valid.assign(labeled.begin() + n_train, labeled.begin() + n_train + n_valid);
  s.test.assign(labeled.begin() + n_train + n_valid, labeled.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.valid.begin(), s.valid.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

/// A graph together with the subset of its nodes that count as OOD instances.
struct OODUnit {
  std::shared_ptr<const Graph> graph;
  std::vector<std::size_t> ood_mask;  // sorted ascending

  void validate() const {
    if (!graph) throw std::invalid_argument("OODUnit: null graph");
    if (ood_mask.empty()) throw std::invalid_argument("OODUnit: empty ood_mask");
    for (const std::size_t i : ood_mask)
      if (i >= graph->num_nodes) throw std::invalid_argument("OODUnit: mask index out of range");
  }
};

/// In-distribution graph with splits plus OOD test units and an optional
/// OOD-exposure unit used only by the energy regularizer.
struct Benchmark {
  std::shared_ptr<const Graph> id_graph;
  Splits splits;
  std::vector<OODUnit> ood_test;
  std::optional<OODUnit> ood_exposure;
  // For label leave-out: class_remap[original_class] = new contiguous class
  // id, or -1 if the class was left out. Empty when no remapping happened.
  std::vector<std::int32_t> class_remap;

  void validate() const {
    if (!id_graph) throw std::invalid_argument("Benchmark: null id_graph");
    id_graph->validate();
    splits.validate(*id_graph);
    if (ood_test.empty()) throw std::invalid_argument("Benchmark: no ood_test units");
    for (const OODUnit& u : ood_test) {
      u.validate();
      u.graph->validate();
      if (u.graph->num_features() != id_graph->num_features())
        throw std::invalid_argument("Benchmark: ood unit feature dimension mismatch");
    }
    if (ood_exposure) {
      ood_exposure->validate();
      ood_exposure->graph->validate();
      if (ood_exposure->graph->num_features() != id_graph->num_features())
        throw std::invalid_argument("Benchmark: exposure feature dimension mismatch");
      for (const OODUnit& u : ood_test) {
        if (u.graph != ood_exposure->graph) continue;
        for (const std::size_t i : ood_exposure->ood_mask)
          if (std::binary_search(u.ood_mask.begin(), u.ood_mask.end(), i))
            throw std::invalid_argument("Benchmark: exposure overlaps an ood_test mask");
      }
    }
  }
};

}  // namespace gnnsafe
