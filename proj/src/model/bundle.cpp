#include "tokattr/model/bundle.hpp"

#include <cmath>
#include <sstream>

#include "tokattr/error.hpp"

namespace tokattr::model {

namespace {

std::string shape_string(const std::vector<std::int64_t>& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ", ";
    out << shape[i];
  }
  out << ']';
  return out.str();
}

std::vector<std::int64_t> actual_shape(const Matrix& m) { return {m.rows(), m.cols()}; }
std::vector<std::int64_t> actual_shape(const Vector& v) { return {v.size()}; }

// Walks the canonical tensors of `weights` in file order, handing each member
// to `visit(spec, member)`. Shared by the mutable and const slot views and by
// allocation so that the three can never disagree on ordering.
template <typename Weights, typename Visit>
void visit_tensors(Weights& weights, const ModelConfig& config, Visit&& visit) {
  const std::int64_t d = config.d_model;
  const std::int64_t v = config.vocab_size;
  const std::int64_t ff = config.ffn_dim();
  const bool has_bias_norm = config.norm_kind == NormKind::layernorm;

  auto norm = [&](auto& params, const std::string& prefix) {
    visit(TensorSpec{prefix + ".weight", {d}}, params.gain);
    if (has_bias_norm) visit(TensorSpec{prefix + ".bias", {d}}, params.bias);
  };

  visit(TensorSpec{"embedding", {v, d}}, weights.embedding);
  if (config.position_kind == PositionKind::learned_absolute) {
    visit(TensorSpec{"positional", {config.max_positions, d}}, weights.positional);
  }
  for (int l = 0; l < config.n_layers; ++l) {
    auto& layer = weights.layers.at(static_cast<std::size_t>(l));
    const std::string p = "layers." + std::to_string(l);
    norm(layer.attn_norm, p + ".attn_norm");
    visit(TensorSpec{p + ".attn.w_q", {d, d}}, layer.attn.w_q);
    visit(TensorSpec{p + ".attn.w_k", {d, d}}, layer.attn.w_k);
    visit(TensorSpec{p + ".attn.w_v", {d, d}}, layer.attn.w_v);
    visit(TensorSpec{p + ".attn.w_o", {d, d}}, layer.attn.w_o);
    norm(layer.ffn_norm, p + ".ffn_norm");
    visit(TensorSpec{p + ".ffn.w_in", {d, ff}}, layer.ffn.w_in);
    if (config.ffn_bias) visit(TensorSpec{p + ".ffn.b_in", {ff}}, layer.ffn.b_in);
    if (config.ffn_kind == FfnKind::gated_silu) {
      visit(TensorSpec{p + ".ffn.w_gate", {d, ff}}, layer.ffn.w_gate);
    }
    visit(TensorSpec{p + ".ffn.w_out", {ff, d}}, layer.ffn.w_out);
    if (config.ffn_bias) visit(TensorSpec{p + ".ffn.b_out", {d}}, layer.ffn.b_out);
  }
  norm(weights.final_norm, "final_norm");
  if (!config.tied_unembedding) {
    visit(TensorSpec{"unembedding", {v, d}}, weights.unembedding);
  }
}

template <typename Member>
void check_shape(const TensorSpec& spec, const Member& member) {
  const auto found = actual_shape(member);
  if (found != spec.shape) {
    throw ShapeMismatchError("tensor '" + spec.name + "': expected shape " +
                             shape_string(spec.shape) + ", found " + shape_string(found));
  }
}

}  // namespace

std::int64_t TensorSpec::element_count() const {
  std::int64_t n = 1;
  for (auto s : shape) n *= s;
  return n;
}

std::vector<TensorSpec> canonical_tensors(const ModelConfig& config) {
  ModelWeights scratch;
  scratch.layers.resize(static_cast<std::size_t>(config.n_layers));
  std::vector<TensorSpec> specs;
  visit_tensors(scratch, config, [&](const TensorSpec& spec, auto&) { specs.push_back(spec); });
  return specs;
}

ModelWeights allocate_weights(const ModelConfig& config) {
  config.validate();
  ModelWeights weights;
  weights.layers.resize(static_cast<std::size_t>(config.n_layers));
  visit_tensors(weights, config, [](const TensorSpec& spec, auto& member) {
    using M = std::decay_t<decltype(member)>;
    if constexpr (std::is_same_v<M, Matrix>) {
      member = Matrix::Zero(spec.shape[0], spec.shape[1]);
    } else {
      member = Vector::Zero(spec.shape[0]);
    }
  });
  return weights;
}

std::vector<TensorSlot> tensor_slots(ModelWeights& weights, const ModelConfig& config) {
  if (weights.layers.size() != static_cast<std::size_t>(config.n_layers)) {
    throw ShapeMismatchError("weights hold " + std::to_string(weights.layers.size()) +
                             " layers, config expects " + std::to_string(config.n_layers));
  }
  std::vector<TensorSlot> slots;
  visit_tensors(weights, config, [&](const TensorSpec& spec, auto& member) {
    check_shape(spec, member);
    slots.push_back({spec, std::span<double>(member.data(), static_cast<std::size_t>(member.size()))});
  });
  return slots;
}

std::vector<ConstTensorSlot> tensor_slots(const ModelWeights& weights, const ModelConfig& config) {
  if (weights.layers.size() != static_cast<std::size_t>(config.n_layers)) {
    throw ShapeMismatchError("weights hold " + std::to_string(weights.layers.size()) +
                             " layers, config expects " + std::to_string(config.n_layers));
  }
  std::vector<ConstTensorSlot> slots;
  visit_tensors(weights, config, [&](const TensorSpec& spec, const auto& member) {
    check_shape(spec, member);
    slots.push_back(
        {spec, std::span<const double>(member.data(), static_cast<std::size_t>(member.size()))});
  });
  return slots;
}

ModelBundle::ModelBundle(ModelConfig config, ModelWeights weights, std::vector<std::string> vocab)
    : config_(std::move(config)), weights_(std::move(weights)), vocab_(std::move(vocab)) {
  config_.validate();
  if (vocab_.size() != static_cast<std::size_t>(config_.vocab_size)) {
    throw ModelFormatError("vocabulary has " + std::to_string(vocab_.size()) +
                           " entries, config expects " + std::to_string(config_.vocab_size));
  }
  for (const auto& slot : tensor_slots(std::as_const(weights_), config_)) {
    for (std::size_t i = 0; i < slot.data.size(); ++i) {
      if (!std::isfinite(slot.data[i])) {
        throw NonFiniteError("tensor '" + slot.spec.name + "': non-finite value at flat index " +
                             std::to_string(i));
      }
    }
  }
}

}  // namespace tokattr::model
