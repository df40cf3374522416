#include "tokattr/attribution/heads.hpp"

#include <algorithm>
#include <cmath>

#include "tokattr/error.hpp"

namespace tokattr::attribution {

namespace {

void check_indices(const model::CachedStates& cache, const model::ModelBundle& model, int layer, int head,
                   int position, int target) {
  if (layer < 0 || layer >= cache.n_layers()) throw IndexError("layer " + std::to_string(layer) + " out of range");
  if (head < 0 || head >= model.config().n_heads) throw IndexError("head " + std::to_string(head) + " out of range");
  if (position < 0 || position >= cache.length()) {
    throw IndexError("position " + std::to_string(position) + " out of range");
  }
  if (target < 0 || target >= model.config().vocab_size) {
    throw IndexError("target " + std::to_string(target) + " out of vocabulary range");
  }
}

}  // namespace

double head_logit_contribution(const model::CachedStates& cache, const model::ModelBundle& model, int layer,
                               int head, int position, int target) {
  check_indices(cache, model, layer, head, position, target);
  return cache.head_out[layer][head].row(position).dot(model.unembedding().row(target));
}

std::vector<double> head_logit_contributions(const model::CachedStates& cache, const model::ModelBundle& model,
                                             int layer, int position, int target) {
  std::vector<double> out(static_cast<std::size_t>(model.config().n_heads));
  for (int h = 0; h < model.config().n_heads; ++h) {
    out[h] = head_logit_contribution(cache, model, layer, h, position, target);
  }
  return out;
}

HeadAttribution apportion_heads(double att_delta, std::span<const double> logit_deltas) {
  if (logit_deltas.empty()) throw DataError("apportion_heads needs at least one head");
  if (!std::isfinite(att_delta)) throw NonFiniteError("attention delta is not finite");
  for (std::size_t h = 0; h < logit_deltas.size(); ++h) {
    if (!std::isfinite(logit_deltas[h])) {
      throw NonFiniteError("logit delta of head " + std::to_string(h) + " is not finite");
    }
  }

  HeadAttribution out;
  out.logit_delta.assign(logit_deltas.begin(), logit_deltas.end());
  const double max = *std::max_element(logit_deltas.begin(), logit_deltas.end());
  out.weight.resize(logit_deltas.size());
  double denom = 0.0;
  for (std::size_t h = 0; h < logit_deltas.size(); ++h) {
    out.weight[h] = std::exp(logit_deltas[h] - max);
    denom += out.weight[h];
  }
  out.prob_share.resize(logit_deltas.size());
  for (std::size_t h = 0; h < logit_deltas.size(); ++h) {
    out.weight[h] /= denom;
    out.prob_share[h] = att_delta * out.weight[h];
  }
  return out;
}

}  // namespace tokattr::attribution
