#include "tokattr/model/config.hpp"

#include <cmath>

#include "tokattr/error.hpp"

namespace tokattr::model {

std::string_view to_string(NormKind kind) {
  switch (kind) {
    case NormKind::layernorm: return "layernorm";
    case NormKind::rmsnorm: return "rmsnorm";
  }
  return "?";
}

std::string_view to_string(PositionKind kind) {
  switch (kind) {
    case PositionKind::learned_absolute: return "learned_absolute";
    case PositionKind::rotary: return "rotary";
    case PositionKind::none: return "none";
  }
  return "?";
}

std::string_view to_string(FfnKind kind) {
  switch (kind) {
    case FfnKind::gelu: return "gelu";
    case FfnKind::gated_silu: return "gated_silu";
  }
  return "?";
}

NormKind parse_norm_kind(std::string_view text) {
  if (text == "layernorm") return NormKind::layernorm;
  if (text == "rmsnorm") return NormKind::rmsnorm;
  throw ConfigError("unknown norm_kind '" + std::string(text) + "'");
}

PositionKind parse_position_kind(std::string_view text) {
  if (text == "learned_absolute") return PositionKind::learned_absolute;
  if (text == "rotary") return PositionKind::rotary;
  if (text == "none") return PositionKind::none;
  throw ConfigError("unknown position_kind '" + std::string(text) + "'");
}

FfnKind parse_ffn_kind(std::string_view text) {
  if (text == "gelu") return FfnKind::gelu;
  if (text == "gated_silu") return FfnKind::gated_silu;
  throw ConfigError("unknown ffn_kind '" + std::string(text) + "'");
}

void ModelConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("invalid model config: ") + what);
  };
  require(n_layers >= 1, "n_layers must be >= 1");
  require(n_heads >= 1, "n_heads must be >= 1");
  require(d_model >= 1, "d_model must be >= 1");
  require(vocab_size >= 1, "vocab_size must be >= 1");
  require(max_positions >= 1, "max_positions must be >= 1");
  require(d_ff >= 0, "d_ff must be >= 0");
  require(d_model % n_heads == 0, "d_model must be divisible by n_heads");
  require(std::isfinite(norm_eps) && norm_eps > 0.0, "norm_eps must be positive");
  if (position_kind == PositionKind::rotary) {
    require(head_dim() % 2 == 0, "rotary positions need an even head dimension");
    require(std::isfinite(rope_theta) && rope_theta > 0.0, "rope_theta must be positive");
  }
}

}  // namespace tokattr::model
