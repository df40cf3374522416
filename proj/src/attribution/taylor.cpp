#include "tokattr/attribution/taylor.hpp"

#include <cmath>

#include "tokattr/attribution/heads.hpp"
#include "tokattr/attribution/probe.hpp"
#include "tokattr/error.hpp"

namespace tokattr::attribution {

TaylorDiagnostic taylor_check(const model::CachedStates& cache, const model::ModelBundle& model, int layer,
                              int position, int target, double scale) {
  if (!(scale > 0.0 && scale <= 1.0)) throw DataError("taylor scale must lie in (0, 1]");
  if (layer < 0 || layer >= cache.n_layers()) throw IndexError("layer " + std::to_string(layer) + " out of range");
  const auto logits = head_logit_contributions(cache, model, layer, position, target);

  const Matrix& unembed = model.unembedding();
  const RowVector h = cache.layer_input(layer).row(position);
  const RowVector r = cache.attn_residual[layer].row(position);
  const RowVector p = probe_distribution(h, unembed);
  const RowVector u = r * unembed.transpose();

  TaylorDiagnostic out;
  out.scale = scale;
  const double py = p[target];
  out.gradient_factor = py * (1.0 - py);
  for (double z : logits) out.logit_sum += z;
  out.first_order_estimate = scale * out.gradient_factor * out.logit_sum;
  double off = 0.0;
  for (Eigen::Index v = 0; v < p.size(); ++v) {
    if (v != target) off += p[v] * u[v];
  }
  out.off_target_term = scale * py * off;
  out.actual = probe(h + scale * r, unembed, target) - probe(h, unembed, target);
  out.abs_error = std::abs(out.actual - (out.first_order_estimate - out.off_target_term));
  out.target_only_error = std::abs(out.actual - out.first_order_estimate);
  return out;
}

}  // namespace tokattr::attribution
