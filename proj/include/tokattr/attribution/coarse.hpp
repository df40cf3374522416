#pragma once

#include <vector>

#include "tokattr/model/bundle.hpp"
#include "tokattr/model/forward.hpp"

namespace tokattr::attribution {

// Residual-stream split of one token's final probability. With probe values
// phi(.) of the cached checkpoints:
//   p_initial    = phi(h0)
//   att_delta[l] = phi(h_mid[l]) - phi(layer_input(l))
//   ffn_delta[l] = phi(h_out[l]) - phi(h_mid[l])
//   ln_delta     = p_final - phi(h_out[L-1])
// and the terms telescope to p_final.
struct CoarseDecomposition {
  double p_initial = 0.0;
  std::vector<double> att_delta;
  std::vector<double> ffn_delta;
  double ln_delta = 0.0;
  double p_final = 0.0;
  double residual = 0.0;  // |total() - p_final|

  double total() const;
};

// `position` is the predicting row; `target` the token it should produce.
CoarseDecomposition decompose_coarse(const model::CachedStates& cache, const model::ModelBundle& model,
                                     int position, int target);

}  // namespace tokattr::attribution
