#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tokattr/linalg.hpp"
#include "tokattr/model/config.hpp"

namespace tokattr::model {

// Row-vector convention throughout: a hidden row x maps through a projection
// W as x * W, so W_Q/W_K/W_V/W_O are d_in x d_out and W_O's rows are split
// into n_heads blocks of head_dim rows each.
struct NormParams {
  Vector gain;
  Vector bias;  // empty for rmsnorm
};

struct AttentionWeights {
  Matrix w_q;
  Matrix w_k;
  Matrix w_v;
  Matrix w_o;
};

struct FfnWeights {
  Matrix w_in;    // d x d_ff
  Vector b_in;    // d_ff, empty when ffn_bias is off
  Matrix w_gate;  // d x d_ff, gated_silu only
  Matrix w_out;   // d_ff x d
  Vector b_out;   // d, empty when ffn_bias is off
};

struct LayerWeights {
  NormParams attn_norm;
  AttentionWeights attn;
  NormParams ffn_norm;
  FfnWeights ffn;
};

struct ModelWeights {
  Matrix embedding;   // V x d
  Matrix positional;  // max_positions x d, learned_absolute only
  std::vector<LayerWeights> layers;
  NormParams final_norm;
  Matrix unembedding;  // V x d, untied models only
};

struct TensorSpec {
  std::string name;
  std::vector<std::int64_t> shape;

  std::int64_t element_count() const;
};

// Canonical tensor list, in file order, for a configuration.
std::vector<TensorSpec> canonical_tensors(const ModelConfig& config);

// Zero-filled weights shaped for `config`.
ModelWeights allocate_weights(const ModelConfig& config);

// Contiguous storage of one canonical tensor inside a ModelWeights.
struct TensorSlot {
  TensorSpec spec;
  std::span<double> data;
};
struct ConstTensorSlot {
  TensorSpec spec;
  std::span<const double> data;
};

// Views in canonical order. Throws ShapeMismatchError if a member is not
// shaped as the config requires.
std::vector<TensorSlot> tensor_slots(ModelWeights& weights, const ModelConfig& config);
std::vector<ConstTensorSlot> tensor_slots(const ModelWeights& weights, const ModelConfig& config);

// Immutable model: configuration, weights and vocabulary strings. Construction
// validates every tensor shape and entry; after that the bundle is read-only
// and may be shared across threads.
class ModelBundle {
 public:
  ModelBundle(ModelConfig config, ModelWeights weights, std::vector<std::string> vocab);

  const ModelConfig& config() const { return config_; }
  const ModelWeights& weights() const { return weights_; }
  const std::vector<std::string>& vocab() const { return vocab_; }

  // Unembedding used by the probe and the final head: the embedding matrix
  // for tied models, the separate tensor otherwise.
  const Matrix& unembedding() const {
    return config_.tied_unembedding ? weights_.embedding : weights_.unembedding;
  }

 private:
  ModelConfig config_;
  ModelWeights weights_;
  std::vector<std::string> vocab_;
};

using ModelHandle = std::shared_ptr<const ModelBundle>;

}  // namespace tokattr::model
