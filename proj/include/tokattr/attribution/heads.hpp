#pragma once

#include <span>
#include <vector>

#include "tokattr/model/bundle.hpp"
#include "tokattr/model/forward.hpp"

namespace tokattr::attribution {

// One layer's attention delta split across heads.
struct HeadAttribution {
  std::vector<double> logit_delta;  // head's contribution to the target logit
  std::vector<double> weight;       // softmax(logit_delta)
  std::vector<double> prob_share;   // att_delta * weight

  std::size_t n_heads() const { return logit_delta.size(); }
};

// head_out[layer][head] row at `position`, dotted with the target's
// unembedding row.
double head_logit_contribution(const model::CachedStates& cache, const model::ModelBundle& model, int layer,
                               int head, int position, int target);

// All heads of one layer, in head order.
std::vector<double> head_logit_contributions(const model::CachedStates& cache, const model::ModelBundle& model,
                                             int layer, int position, int target);

// Softmax apportionment with max-subtraction. A zero att_delta yields zero
// shares regardless of the weights.
HeadAttribution apportion_heads(double att_delta, std::span<const double> logit_deltas);

}  // namespace tokattr::attribution
