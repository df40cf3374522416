#pragma once

#include <string>
#include <string_view>

namespace tokattr::model {

enum class NormKind { layernorm, rmsnorm };
enum class PositionKind { learned_absolute, rotary, none };
// gelu: two matrices (in/out) with GELU between them.
// gated_silu: three matrices, out(silu(x W_gate) * (x W_in)).
enum class FfnKind { gelu, gated_silu };

std::string_view to_string(NormKind kind);
std::string_view to_string(PositionKind kind);
std::string_view to_string(FfnKind kind);
NormKind parse_norm_kind(std::string_view text);
PositionKind parse_position_kind(std::string_view text);
FfnKind parse_ffn_kind(std::string_view text);

struct ModelConfig {
  int n_layers = 1;
  int n_heads = 1;
  int d_model = 8;
  int vocab_size = 10;
  int max_positions = 64;
  NormKind norm_kind = NormKind::layernorm;
  PositionKind position_kind = PositionKind::learned_absolute;
  FfnKind ffn_kind = FfnKind::gelu;
  int d_ff = 0;  // 0 selects 4 * d_model
  bool ffn_bias = true;
  bool tied_unembedding = true;
  double norm_eps = 1e-5;
  double rope_theta = 10000.0;

  int head_dim() const { return d_model / n_heads; }
  int ffn_dim() const { return d_ff > 0 ? d_ff : 4 * d_model; }

  // Throws ConfigError naming the first violated constraint.
  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

}  // namespace tokattr::model
