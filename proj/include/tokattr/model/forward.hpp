#pragma once

#include <span>
#include <vector>

#include "tokattr/model/bundle.hpp"

namespace tokattr::model {

// Every residual checkpoint of one teacher-forced pass. Layer indices are
// 0-based: h_mid[l] and h_out[l] belong to block l, and the input to block l
// is layer_input(l) (h0 for l = 0).
struct CachedStates {
  std::vector<int> tokens;
  Matrix h0;                                // T x d
  std::vector<Matrix> h_mid;                // [L] T x d, after attention
  std::vector<Matrix> h_out;                // [L] T x d, after FFN
  std::vector<Matrix> attn_residual;        // [L] concat(A_h V_h) * W_O
  std::vector<Matrix> ffn_residual;         // [L]
  std::vector<std::vector<Matrix>> attn;    // [L][H] T x T, causal, row-stochastic
  std::vector<std::vector<Matrix>> head_out;  // [L][H] T x d, (A_h V_h) * W_O^(h)
  Matrix final_probs;                       // T x V

  int length() const { return static_cast<int>(tokens.size()); }
  int n_layers() const { return static_cast<int>(h_out.size()); }
  const Matrix& layer_input(int layer) const { return layer == 0 ? h0 : h_out[layer - 1]; }
  const Matrix& final_hidden() const { return h_out.back(); }
};

// Runs the full sequence in one pass, caching all intermediate state.
// Throws IndexError for an empty or over-long sequence or an id >= V.
CachedStates forward_cached(const ModelBundle& model, std::span<const int> token_ids);

// Normalization used before each block and before unembedding.
RowVector apply_norm(const ModelConfig& config, const NormParams& params,
                     const Eigen::Ref<const RowVector>& x);

}  // namespace tokattr::model
