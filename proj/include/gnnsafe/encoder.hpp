#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gnnsafe/io.hpp"
#include "gnnsafe/matrix.hpp"
#include "gnnsafe/rng.hpp"

namespace gnnsafe {

enum class EncoderKind { gcn, mlp };

inline std::string to_string(EncoderKind k) { return k == EncoderKind::gcn ? "gcn" : "mlp"; }

inline EncoderKind encoder_kind_from(const std::string& s) {
  if (s == "gcn") return EncoderKind::gcn;
  if (s == "mlp") return EncoderKind::mlp;
  throw std::invalid_argument("unknown encoder kind '" + s + "'");
}

struct EncoderConfig {
  EncoderKind kind = EncoderKind::gcn;
  std::size_t layers = 2;
  std::size_t hidden = 64;
  std::size_t out_classes = 0;
  bool use_feature_norm = true;

  void validate() const {
    if (layers < 1) throw std::invalid_argument("EncoderConfig: layers must be >= 1");
    if (hidden < 1) throw std::invalid_argument("EncoderConfig: hidden must be >= 1");
    if (out_classes < 2) throw std::invalid_argument("EncoderConfig: out_classes must be >= 2");
  }

  // Dimensions of layer l in 0..layers-1.
  std::size_t in_dim_of(std::size_t l, std::size_t in_dim) const {
    return l == 0 ? in_dim : hidden;
  }
  std::size_t out_dim_of(std::size_t l) const { return l + 1 == layers ? out_classes : hidden; }
};

struct EncoderParams {
  std::vector<DenseMatrix> weights;              // W_l: in_l x out_l
  std::vector<std::vector<double>> biases;       // b_l: out_l
  std::vector<std::vector<double>> norm_scale;   // hidden layers only
  std::vector<std::vector<double>> norm_shift;
};

/// Glorot-uniform weights, zero biases, unit scale / zero shift.
inline EncoderParams init_params(const EncoderConfig& cfg, std::size_t in_dim,
                                 std::uint64_t seed) {
  cfg.validate();
  if (in_dim < 1) throw std::invalid_argument("init_params: in_dim must be >= 1");
  Rng rng(seed);
  EncoderParams p;
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    const std::size_t fan_in = cfg.in_dim_of(l, in_dim);
    const std::size_t fan_out = cfg.out_dim_of(l);
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    DenseMatrix w(fan_in, fan_out);
    for (double& v : w.data()) v = rng.uniform(-a, a);
    p.weights.push_back(std::move(w));
    p.biases.emplace_back(fan_out, 0.0);
  }
  if (cfg.use_feature_norm) {
    for (std::size_t l = 0; l + 1 < cfg.layers; ++l) {
      p.norm_scale.emplace_back(cfg.hidden, 1.0);
      p.norm_shift.emplace_back(cfg.hidden, 0.0);
    }
  }
  return p;
}

/// Gradients share the parameter layout.
using EncoderGrads = EncoderParams;

inline EncoderGrads zero_like(const EncoderParams& p) {
  EncoderGrads g;
  for (const auto& w : p.weights) g.weights.emplace_back(w.rows(), w.cols());
  for (const auto& b : p.biases) g.biases.emplace_back(b.size(), 0.0);
  for (const auto& s : p.norm_scale) g.norm_scale.emplace_back(s.size(), 0.0);
  for (const auto& s : p.norm_shift) g.norm_shift.emplace_back(s.size(), 0.0);
  return g;
}

inline void accumulate(EncoderGrads& into, const EncoderGrads& from) {
  for (std::size_t l = 0; l < into.weights.size(); ++l) {
    for (std::size_t i = 0; i < into.weights[l].size(); ++i)
      into.weights[l].data()[i] += from.weights[l].data()[i];
    for (std::size_t i = 0; i < into.biases[l].size(); ++i)
      into.biases[l][i] += from.biases[l][i];
  }
  for (std::size_t l = 0; l < into.norm_scale.size(); ++l) {
    for (std::size_t i = 0; i < into.norm_scale[l].size(); ++i)
      into.norm_scale[l][i] += from.norm_scale[l][i];
    for (std::size_t i = 0; i < into.norm_shift[l].size(); ++i)
      into.norm_shift[l][i] += from.norm_shift[l][i];
  }
}

/// Flat parameter vector in declaration order: weights, biases, norm scales,
/// norm shifts (each list in layer order). Checkpoints and the optimizer use
/// this layout.
inline std::vector<double> flatten(const EncoderParams& p) {
  std::vector<double> out;
  for (const auto& w : p.weights) out.insert(out.end(), w.data().begin(), w.data().end());
  for (const auto& b : p.biases) out.insert(out.end(), b.begin(), b.end());
  for (const auto& s : p.norm_scale) out.insert(out.end(), s.begin(), s.end());
  for (const auto& s : p.norm_shift) out.insert(out.end(), s.begin(), s.end());
  return out;
}

inline void unflatten(EncoderParams& p, const std::vector<double>& flat) {
  std::size_t k = 0;
  const auto take = [&](double* dst, std::size_t n) {
    if (k + n > flat.size()) throw std::invalid_argument("unflatten: vector too short");
    std::copy(flat.begin() + static_cast<std::ptrdiff_t>(k),
              flat.begin() + static_cast<std::ptrdiff_t>(k + n), dst);
    k += n;
  };
  for (auto& w : p.weights) take(w.data().data(), w.size());
  for (auto& b : p.biases) take(b.data(), b.size());
  for (auto& s : p.norm_scale) take(s.data(), s.size());
  for (auto& s : p.norm_shift) take(s.data(), s.size());
  if (k != flat.size()) throw std::invalid_argument("unflatten: vector too long");
}

/// 1 where the flat vector holds a weight-matrix entry (weight decay applies
/// to those only).
inline std::vector<std::uint8_t> weight_entry_mask(const EncoderParams& p) {
  std::vector<std::uint8_t> mask;
  std::size_t n_w = 0, n_rest = 0;
  for (const auto& w : p.weights) n_w += w.size();
  for (const auto& b : p.biases) n_rest += b.size();
  for (const auto& s : p.norm_scale) n_rest += s.size();
  for (const auto& s : p.norm_shift) n_rest += s.size();
  mask.assign(n_w, 1);
  mask.insert(mask.end(), n_rest, 0);
  return mask;
}

struct ForwardCache {
  // Index l covers layers 0..L-1. lin_in[l] is the input of the linear map
  // (P Z for gcn, Z for mlp); act_in[l] is the ReLU input of hidden layers.
  std::vector<DenseMatrix> lin_in;
  std::vector<DenseMatrix> act_in;
  std::vector<DenseMatrix> xhat;              // per hidden layer, when normalizing
  std::vector<std::vector<double>> inv_std;   // per hidden layer, per column
  DenseMatrix logits;
};

namespace detail {

constexpr double kNormEps = 1e-5;

/// Full-graph standardization per column with learnable scale/shift; the
/// full-batch specialization of batch normalization (biased variance).
inline DenseMatrix feature_norm_forward(const DenseMatrix& y, const std::vector<double>& scale,
                                        const std::vector<double>& shift, DenseMatrix& xhat_out,
                                        std::vector<double>& inv_std_out) {
  const std::size_t n = y.rows(), h = y.cols();
  std::vector<double> mean(h, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < h; ++j) mean[j] += y(i, j);
  for (double& m : mean) m /= static_cast<double>(n);
  std::vector<double> var(h, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < h; ++j) {
      const double d = y(i, j) - mean[j];
      var[j] += d * d;
    }
  inv_std_out.assign(h, 0.0);
  for (std::size_t j = 0; j < h; ++j)
    inv_std_out[j] = 1.0 / std::sqrt(var[j] / static_cast<double>(n) + kNormEps);
  xhat_out = DenseMatrix(n, h);
  DenseMatrix out(n, h);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < h; ++j) {
      const double xh = (y(i, j) - mean[j]) * inv_std_out[j];
      xhat_out(i, j) = xh;
      out(i, j) = scale[j] * xh + shift[j];
    }
  return out;
}

/// dL/dY for y -> scale*xhat(y)+shift, plus scale/shift gradients.
inline DenseMatrix feature_norm_backward(const DenseMatrix& d_out, const DenseMatrix& xhat,
                                         const std::vector<double>& inv_std,
                                         const std::vector<double>& scale,
                                         std::vector<double>& d_scale,
                                         std::vector<double>& d_shift) {
  const std::size_t n = d_out.rows(), h = d_out.cols();
  d_scale.assign(h, 0.0);
  d_shift.assign(h, 0.0);
  std::vector<double> mean_dxhat(h, 0.0), mean_dxhat_xhat(h, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < h; ++j) {
      d_scale[j] += d_out(i, j) * xhat(i, j);
      d_shift[j] += d_out(i, j);
      const double dxh = d_out(i, j) * scale[j];
      mean_dxhat[j] += dxh;
      mean_dxhat_xhat[j] += dxh * xhat(i, j);
    }
  for (std::size_t j = 0; j < h; ++j) {
    mean_dxhat[j] /= static_cast<double>(n);
    mean_dxhat_xhat[j] /= static_cast<double>(n);
  }
  DenseMatrix d_y(n, h);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < h; ++j) {
      const double dxh = d_out(i, j) * scale[j];
      d_y(i, j) = inv_std[j] * (dxh - mean_dxhat[j] - xhat(i, j) * mean_dxhat_xhat[j]);
    }
  return d_y;
}

}  // namespace detail

/// Layer rule: Z^(l) = ReLU(Norm(P Z^(l-1) W^(l) + b^(l))) with P the
/// self-looped symmetric-normalized adjacency for gcn and the identity for
/// mlp; the last layer omits Norm and ReLU. `norm_adj` is required for gcn
/// and ignored for mlp.
inline ForwardCache forward(const EncoderParams& params, const EncoderConfig& cfg,
                            const DenseMatrix& features, const SparseMatrix* norm_adj) {
  cfg.validate();
  if (params.weights.size() != cfg.layers)
    throw std::invalid_argument("forward: parameter/config layer count mismatch");
  const bool gcn = cfg.kind == EncoderKind::gcn;
  if (gcn) {
    if (norm_adj == nullptr) throw std::invalid_argument("forward: gcn requires norm_adj");
    if (norm_adj->rows() != features.rows() || norm_adj->cols() != features.rows())
      throw std::invalid_argument("forward: norm_adj size does not match features");
  }
  ForwardCache cache;
  DenseMatrix z = features;
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    const DenseMatrix& w = params.weights[l];
    if (w.rows() != z.cols()) throw std::invalid_argument("forward: weight shape mismatch");
    DenseMatrix h = gcn ? spmm(*norm_adj, z) : z;
    DenseMatrix y = matmul(h, w);
    add_row_vector(y, params.biases[l]);
    cache.lin_in.push_back(std::move(h));
    if (l + 1 == cfg.layers) {
      cache.logits = std::move(y);
      break;
    }
    DenseMatrix act_in;
    if (cfg.use_feature_norm) {
      DenseMatrix xhat;
      std::vector<double> inv_std;
      act_in = detail::feature_norm_forward(y, params.norm_scale[l], params.norm_shift[l], xhat,
                                            inv_std);
      cache.xhat.push_back(std::move(xhat));
      cache.inv_std.push_back(std::move(inv_std));
    } else {
      act_in = std::move(y);
    }
    z = DenseMatrix(act_in.rows(), act_in.cols());
    for (std::size_t i = 0; i < act_in.size(); ++i)
      z.data()[i] = act_in.data()[i] > 0.0 ? act_in.data()[i] : 0.0;
    cache.act_in.push_back(std::move(act_in));
  }
  if (!cache.logits.all_finite()) throw NumericError("forward: non-finite logits");
  return cache;
}

/// Reverse-mode pass of `forward`. P is symmetric, so the adjoint of
/// multiplying by P is multiplying by P again.
inline EncoderGrads backward(const ForwardCache& cache, const EncoderParams& params,
                             const EncoderConfig& cfg, const SparseMatrix* norm_adj,
                             const DenseMatrix& grad_logits) {
  if (cache.lin_in.size() != cfg.layers)
    throw std::invalid_argument("backward: cache does not match config");
  if (grad_logits.rows() != cache.logits.rows() || grad_logits.cols() != cache.logits.cols())
    throw std::invalid_argument("backward: grad_logits shape mismatch");
  const bool gcn = cfg.kind == EncoderKind::gcn;
  EncoderGrads grads = zero_like(params);
  DenseMatrix d_y = grad_logits;
  for (std::size_t li = cfg.layers; li-- > 0;) {
    grads.weights[li] = matmul_transa(cache.lin_in[li], d_y);
    grads.biases[li] = column_sums(d_y);
    if (li == 0) break;
    DenseMatrix d_h = matmul_transb(d_y, params.weights[li]);
    DenseMatrix d_z = gcn ? spmm(*norm_adj, d_h) : std::move(d_h);
    // Through ReLU of layer li-1: mask by its stored input.
    const DenseMatrix& act_in = cache.act_in[li - 1];
    for (std::size_t i = 0; i < d_z.size(); ++i)
      if (act_in.data()[i] <= 0.0) d_z.data()[i] = 0.0;
    if (cfg.use_feature_norm) {
      d_y = detail::feature_norm_backward(d_z, cache.xhat[li - 1], cache.inv_std[li - 1],
                                          params.norm_scale[li - 1], grads.norm_scale[li - 1],
                                          grads.norm_shift[li - 1]);
    } else {
      d_y = std::move(d_z);
    }
  }
  return grads;
}

struct Checkpoint {
  EncoderConfig cfg;
  std::size_t in_dim = 0;
  std::uint64_t seed = 0;
  std::vector<std::int32_t> class_remap;
  EncoderParams params;
};

/// model.json (config, in_dim, seed, class remap, weight layout table) plus
/// weights.bin (little-endian 64-bit floats in flatten order).
inline void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json j;
  j["format"] = "gnnsafe-checkpoint-v1";
  j["config"] = {{"kind", to_string(ck.cfg.kind)},
                 {"layers", ck.cfg.layers},
                 {"hidden", ck.cfg.hidden},
                 {"out_classes", ck.cfg.out_classes},
                 {"use_feature_norm", ck.cfg.use_feature_norm}};
  j["in_dim"] = ck.in_dim;
  j["seed"] = ck.seed;
  j["class_remap"] = ck.class_remap;
  nlohmann::ordered_json layout = nlohmann::ordered_json::array();
  std::size_t offset = 0;
  const auto block = [&](const std::string& name, std::size_t rows, std::size_t cols) {
    layout.push_back({{"name", name}, {"rows", rows}, {"cols", cols}, {"offset", offset}});
    offset += rows * cols;
  };
  for (std::size_t l = 0; l < ck.params.weights.size(); ++l)
    block("W" + std::to_string(l + 1), ck.params.weights[l].rows(), ck.params.weights[l].cols());
  for (std::size_t l = 0; l < ck.params.biases.size(); ++l)
    block("b" + std::to_string(l + 1), 1, ck.params.biases[l].size());
  for (std::size_t l = 0; l < ck.params.norm_scale.size(); ++l)
    block("scale" + std::to_string(l + 1), 1, ck.params.norm_scale[l].size());
  for (std::size_t l = 0; l < ck.params.norm_shift.size(); ++l)
    block("shift" + std::to_string(l + 1), 1, ck.params.norm_shift[l].size());
  j["layout"] = layout;
  detail::write_json(dir / "model.json", j);
  detail::write_binary(dir / "weights.bin", flatten(ck.params));
}

inline Checkpoint load_checkpoint(const std::filesystem::path& dir) {
  const auto meta_path = dir / "model.json";
  const nlohmann::ordered_json j = detail::read_json(meta_path);
  Checkpoint ck;
  if (!j.contains("config")) throw FormatError(meta_path.string() + ": missing field 'config'");
  const auto& c = j["config"];
  ck.cfg.kind = encoder_kind_from(
      detail::json_field<std::string>(c, "kind", meta_path.string()));
  ck.cfg.layers = detail::json_field<std::size_t>(c, "layers", meta_path.string());
  ck.cfg.hidden = detail::json_field<std::size_t>(c, "hidden", meta_path.string());
  ck.cfg.out_classes = detail::json_field<std::size_t>(c, "out_classes", meta_path.string());
  ck.cfg.use_feature_norm = detail::json_field<bool>(c, "use_feature_norm", meta_path.string());
  ck.in_dim = detail::json_field<std::size_t>(j, "in_dim", meta_path.string());
  ck.seed = detail::json_field<std::uint64_t>(j, "seed", meta_path.string());
  ck.class_remap =
      detail::json_field<std::vector<std::int32_t>>(j, "class_remap", meta_path.string());
  ck.cfg.validate();
  ck.params = init_params(ck.cfg, ck.in_dim, 0);  // shapes only; values overwritten below
  std::size_t total = 0;
  for (const auto& w : ck.params.weights) total += w.size();
  for (const auto& b : ck.params.biases) total += b.size();
  for (const auto& s : ck.params.norm_scale) total += s.size();
  for (const auto& s : ck.params.norm_shift) total += s.size();
  const std::vector<double> flat =
      detail::read_binary<double>(dir / "weights.bin", total, "weights.bin");
  unflatten(ck.params, flat);
  return ck;
}

}  // namespace gnnsafe
