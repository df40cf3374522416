#include "tokattr/model/forward.hpp"

#include <cmath>
#include <numbers>

#include "tokattr/error.hpp"

namespace tokattr::model {

namespace {

Matrix norm_rows(const ModelConfig& config, const NormParams& params, const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index t = 0; t < x.rows(); ++t) out.row(t) = apply_norm(config, params, x.row(t));
  return out;
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }

double silu(double x) { return x / (1.0 + std::exp(-x)); }

// Rotate-half rotary embedding applied in place to one head's rows.
void apply_rotary(Eigen::Ref<Matrix> head, double theta) {
  const Eigen::Index half = head.cols() / 2;
  for (Eigen::Index pos = 0; pos < head.rows(); ++pos) {
    for (Eigen::Index i = 0; i < half; ++i) {
      const double freq = std::pow(theta, -2.0 * static_cast<double>(i) / static_cast<double>(head.cols()));
      const double angle = static_cast<double>(pos) * freq;
      const double c = std::cos(angle), s = std::sin(angle);
      const double a = head(pos, i), b = head(pos, i + half);
      head(pos, i) = a * c - b * s;
      head(pos, i + half) = a * s + b * c;
    }
  }
}

// Causal softmax of q k^T / sqrt(dh); entries above the diagonal are exactly 0.
Matrix causal_attention(const Matrix& q, const Matrix& k) {
  const Eigen::Index t_len = q.rows();
  const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  Matrix scores = (q * k.transpose()) * scale;
  Matrix attn = Matrix::Zero(t_len, t_len);
  for (Eigen::Index row = 0; row < t_len; ++row) {
    const double max = scores.row(row).head(row + 1).maxCoeff();
    double denom = 0.0;
    for (Eigen::Index col = 0; col <= row; ++col) {
      attn(row, col) = std::exp(scores(row, col) - max);
      denom += attn(row, col);
    }
    attn.row(row).head(row + 1) /= denom;
  }
  return attn;
}

}  // namespace

RowVector apply_norm(const ModelConfig& config, const NormParams& params,
                     const Eigen::Ref<const RowVector>& x) {
  const double n = static_cast<double>(x.size());
  RowVector out;
  if (config.norm_kind == NormKind::layernorm) {
    const double mean = x.sum() / n;
    const RowVector centered = x.array() - mean;
    const double var = centered.squaredNorm() / n;
    out = centered / std::sqrt(var + config.norm_eps);
    out = out.cwiseProduct(params.gain.transpose());
    if (params.bias.size() > 0) out += params.bias.transpose();
  } else {
    const double ms = x.squaredNorm() / n;
    out = x / std::sqrt(ms + config.norm_eps);
    out = out.cwiseProduct(params.gain.transpose());
  }
  return out;
}

CachedStates forward_cached(const ModelBundle& model, std::span<const int> token_ids) {
  const ModelConfig& config = model.config();
  const ModelWeights& w = model.weights();
  const auto t_len = static_cast<Eigen::Index>(token_ids.size());
  if (t_len < 1) throw IndexError("token sequence is empty");
  if (t_len > config.max_positions) {
    throw IndexError("sequence of length " + std::to_string(t_len) + " exceeds max_positions " +
                     std::to_string(config.max_positions));
  }
  for (std::size_t i = 0; i < token_ids.size(); ++i) {
    if (token_ids[i] < 0 || token_ids[i] >= config.vocab_size) {
      throw IndexError("token id " + std::to_string(token_ids[i]) + " at position " + std::to_string(i) +
                       " out of range for vocabulary of " + std::to_string(config.vocab_size));
    }
  }

  const Eigen::Index d = config.d_model;
  const Eigen::Index dh = config.head_dim();
  const int n_heads = config.n_heads;

  CachedStates cache;
  cache.tokens.assign(token_ids.begin(), token_ids.end());
  cache.h0.resize(t_len, d);
  for (Eigen::Index t = 0; t < t_len; ++t) {
    cache.h0.row(t) = w.embedding.row(token_ids[static_cast<std::size_t>(t)]);
    if (config.position_kind == PositionKind::learned_absolute) cache.h0.row(t) += w.positional.row(t);
  }

  for (int l = 0; l < config.n_layers; ++l) {
    const LayerWeights& layer = w.layers[static_cast<std::size_t>(l)];
    const Matrix& x = cache.layer_input(l);

    const Matrix normed = norm_rows(config, layer.attn_norm, x);
    Matrix q = normed * layer.attn.w_q;
    Matrix k = normed * layer.attn.w_k;
    const Matrix v = normed * layer.attn.w_v;

    Matrix concat(t_len, d);
    std::vector<Matrix> attn(static_cast<std::size_t>(n_heads));
    std::vector<Matrix> head_out(static_cast<std::size_t>(n_heads));
    for (int h = 0; h < n_heads; ++h) {
      const Eigen::Index c0 = h * dh;
      Matrix qh = q.middleCols(c0, dh);
      Matrix kh = k.middleCols(c0, dh);
      if (config.position_kind == PositionKind::rotary) {
        apply_rotary(qh, config.rope_theta);
        apply_rotary(kh, config.rope_theta);
      }
      attn[h] = causal_attention(qh, kh);
      const Matrix z = attn[h] * v.middleCols(c0, dh);
      concat.middleCols(c0, dh) = z;
      head_out[h] = z * layer.attn.w_o.middleRows(c0, dh);
    }
    Matrix attn_residual = concat * layer.attn.w_o;
    Matrix h_mid = x + attn_residual;

    const Matrix normed2 = norm_rows(config, layer.ffn_norm, h_mid);
    Matrix hidden = normed2 * layer.ffn.w_in;
    if (layer.ffn.b_in.size() > 0) hidden.rowwise() += layer.ffn.b_in.transpose();
    if (config.ffn_kind == FfnKind::gelu) {
      hidden = hidden.unaryExpr(&gelu);
    } else {
      const Matrix gate = (normed2 * layer.ffn.w_gate).unaryExpr(&silu);
      hidden = gate.cwiseProduct(hidden);
    }
    Matrix ffn_residual = hidden * layer.ffn.w_out;
    if (layer.ffn.b_out.size() > 0) ffn_residual.rowwise() += layer.ffn.b_out.transpose();
    Matrix h_out = h_mid + ffn_residual;

    cache.attn.push_back(std::move(attn));
    cache.head_out.push_back(std::move(head_out));
    cache.attn_residual.push_back(std::move(attn_residual));
    cache.h_mid.push_back(std::move(h_mid));
    cache.ffn_residual.push_back(std::move(ffn_residual));
    cache.h_out.push_back(std::move(h_out));
  }

  const Matrix& unembed = model.unembedding();
  const Matrix final_normed = norm_rows(config, w.final_norm, cache.final_hidden());
  Matrix logits = final_normed * unembed.transpose();
  cache.final_probs.resize(t_len, config.vocab_size);
  for (Eigen::Index t = 0; t < t_len; ++t) {
    const double max = logits.row(t).maxCoeff();
    const RowVector e = (logits.row(t).array() - max).exp();
    cache.final_probs.row(t) = e / e.sum();
  }
  return cache;
}

}  // namespace tokattr::model
