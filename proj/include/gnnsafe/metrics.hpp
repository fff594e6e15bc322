#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "gnnsafe/matrix.hpp"

namespace gnnsafe {

/// Mann-Whitney statistic P(pos > neg) + 0.5 P(pos = neg). Win and tie counts
/// are exact integers, so the result matches a pairwise count bit for bit.
inline double auroc(const std::vector<double>& pos, const std::vector<double>& neg) {
  if (pos.empty() || neg.empty()) throw std::invalid_argument("auroc: empty score list");
  std::vector<double> sorted_neg = neg;
  std::sort(sorted_neg.begin(), sorted_neg.end());
  double wins = 0.0, ties = 0.0;
  for (const double p : pos) {
    const auto lo = std::lower_bound(sorted_neg.begin(), sorted_neg.end(), p);
    const auto hi = std::upper_bound(lo, sorted_neg.end(), p);
    wins += static_cast<double>(lo - sorted_neg.begin());
    ties += static_cast<double>(hi - lo);
  }
  return (wins + 0.5 * ties) /
         (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

/// Area under the precision-recall curve (positives = in-distribution) via a
/// descending sweep over distinct scores with tie groups collapsed:
/// sum over groups of (R_k - R_{k-1}) * P_k.
inline double aupr(const std::vector<double>& pos, const std::vector<double>& neg) {
  if (pos.empty() || neg.empty()) throw std::invalid_argument("aupr: empty score list");
  std::vector<double> p_desc = pos, n_desc = neg;
  std::sort(p_desc.begin(), p_desc.end(), std::greater<>());
  std::sort(n_desc.begin(), n_desc.end(), std::greater<>());
  const std::size_t np = p_desc.size(), nn = n_desc.size();
  std::size_t i = 0, j = 0, tp = 0, fp = 0;
  double area = 0.0, prev_recall = 0.0;
  while (i < np || j < nn) {
    const double v = (i < np && (j >= nn || p_desc[i] >= n_desc[j])) ? p_desc[i] : n_desc[j];
    while (i < np && p_desc[i] == v) {
      ++tp;
      ++i;
    }
    while (j < nn && n_desc[j] == v) {
      ++fp;
      ++j;
    }
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double recall = static_cast<double>(tp) / static_cast<double>(np);
    area += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return area;
}

/// FPR at the smallest admitted set whose TPR reaches `level`: the threshold
/// is the m-th largest positive score for the smallest m with m/|pos| >=
/// level; returns |{neg >= threshold}| / |neg|.
inline double fpr_at_tpr(const std::vector<double>& pos, const std::vector<double>& neg,
                         double level = 0.95) {
  if (pos.empty() || neg.empty()) throw std::invalid_argument("fpr_at_tpr: empty score list");
  if (!(level > 0.0 && level <= 1.0))
    throw std::invalid_argument("fpr_at_tpr: level must lie in (0, 1]");
  std::vector<double> p_desc = pos;
  std::sort(p_desc.begin(), p_desc.end(), std::greater<>());
  std::size_t m = 1;
  while (static_cast<double>(m) / static_cast<double>(p_desc.size()) < level) ++m;
  const double threshold = p_desc[m - 1];
  std::size_t above = 0;
  for (const double v : neg)
    if (v >= threshold) ++above;
  return static_cast<double>(above) / static_cast<double>(neg.size());
}

/// Fraction of mask nodes whose argmax logit (ties to the lowest class index)
/// equals the label.
inline double accuracy(const DenseMatrix& logits, const std::vector<std::int32_t>& labels,
                       const std::vector<std::size_t>& mask) {
  if (mask.empty()) throw std::invalid_argument("accuracy: empty mask");
  std::size_t hits = 0;
  for (const std::size_t i : mask) {
    if (labels[i] < 0) throw std::invalid_argument("accuracy: unlabeled node in mask");
    std::size_t arg = 0;
    for (std::size_t c = 1; c < logits.cols(); ++c)
      if (logits(i, c) > logits(i, arg)) arg = c;
    if (static_cast<std::int32_t>(arg) == labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(mask.size());
}

/// Nearest-rank (ceil) quantile of validation in-distribution energies: the
/// smallest m-th order statistic with m/n >= level, so at least a `level`
/// fraction of validation nodes satisfies energy <= tau.
inline double calibrate_tau(std::vector<double> val_energies, double level = 0.95) {
  if (val_energies.empty()) throw std::invalid_argument("calibrate_tau: empty energies");
  if (!(level > 0.0 && level <= 1.0))
    throw std::invalid_argument("calibrate_tau: level must lie in (0, 1]");
  std::sort(val_energies.begin(), val_energies.end());
  std::size_t m = 1;
  while (static_cast<double>(m) / static_cast<double>(val_energies.size()) < level) ++m;
  return val_energies[m - 1];
}

}  // namespace gnnsafe
