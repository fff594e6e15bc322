#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "gnnsafe/matrix.hpp"

namespace gnnsafe {

enum class EnergyKind { raw, propagated };

/// Per-node free energies, either raw (-logsumexp of logits) or after energy
/// belief propagation.
struct EnergyVector {
  std::vector<double> values;
  EnergyKind kind = EnergyKind::raw;
  double alpha = 0.0;     // propagated only
  std::size_t steps = 0;  // propagated only
};

/// E_i = -logsumexp(logits row i).
inline EnergyVector node_energy(const DenseMatrix& logits) {
  if (logits.cols() < 2) throw std::invalid_argument("node_energy: need at least 2 classes");
  EnergyVector e;
  e.values = logsumexp_rows(logits);
  for (double& v : e.values) v = -v;
  return e;
}

/// Energy belief propagation E^(k) = alpha E^(k-1) + (1-alpha) D^-1 A E^(k-1)
/// on the raw (no self-loop) adjacency. Zero-degree nodes keep their energy
/// unchanged: the neighbor-average term is undefined for them, so the
/// (1-alpha) mass returns to the self term.
inline EnergyVector propagate_energy(const EnergyVector& e, const SparseMatrix& adj, double alpha,
                                     std::size_t steps) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("propagate_energy: alpha must lie in (0, 1]");
  if (adj.rows() != e.values.size())
    throw std::invalid_argument("propagate_energy: adjacency/energy size mismatch");
  const SparseMatrix p = row_normalize(adj);
  const std::vector<double> deg = row_sums(adj);
  std::vector<double> cur = e.values;
  for (std::size_t k = 0; k < steps; ++k) {
    const std::vector<double> avg = spmv(p, cur);
    std::vector<double> next(cur.size());
    for (std::size_t i = 0; i < cur.size(); ++i)
      next[i] = deg[i] == 0.0 ? cur[i] : alpha * cur[i] + (1.0 - alpha) * avg[i];
    cur = std::move(next);
  }
  EnergyVector out;
  out.values = std::move(cur);
  out.kind = EnergyKind::propagated;
  out.alpha = alpha;
  out.steps = steps;
  return out;
}

/// Adjoint of propagate_energy: applies the transposed update matrix
/// (diag(m) + (1-alpha) D^-1 A with m_i = 1 on zero-degree nodes, alpha
/// otherwise) `steps` times to a gradient w.r.t. the propagated energies.
inline std::vector<double> propagate_pullback(const std::vector<double>& grad_out,
                                              const SparseMatrix& adj, double alpha,
                                              std::size_t steps) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("propagate_pullback: alpha must lie in (0, 1]");
  if (adj.rows() != grad_out.size())
    throw std::invalid_argument("propagate_pullback: adjacency/gradient size mismatch");
  const SparseMatrix p = row_normalize(adj);
  const std::vector<double> deg = row_sums(adj);
  std::vector<double> cur = grad_out;
  for (std::size_t k = 0; k < steps; ++k) {
    const std::vector<double> spread = spmv_transposed(p, cur);
    std::vector<double> next(cur.size());
    for (std::size_t i = 0; i < cur.size(); ++i) {
      const double self = deg[i] == 0.0 ? cur[i] : alpha * cur[i];
      next[i] = self + (1.0 - alpha) * spread[i];
    }
    cur = std::move(next);
  }
  return cur;
}

/// Maximum softmax probability per node; higher = more in-distribution.
inline std::vector<double> msp_score(const DenseMatrix& logits) {
  const DenseMatrix sm = softmax_rows(logits);
  std::vector<double> out(sm.rows());
  for (std::size_t i = 0; i < sm.rows(); ++i) {
    double mx = sm(i, 0);
    for (std::size_t j = 1; j < sm.cols(); ++j) mx = std::max(mx, sm(i, j));
    out[i] = mx;
  }
  return out;
}

/// 1 = in-distribution (energy <= tau), 0 = OOD declared.
inline std::vector<int> detect(const EnergyVector& e, double tau) {
  std::vector<int> out(e.values.size());
  for (std::size_t i = 0; i < e.values.size(); ++i) out[i] = e.values[i] <= tau ? 1 : 0;
  return out;
}

}  // namespace gnnsafe
