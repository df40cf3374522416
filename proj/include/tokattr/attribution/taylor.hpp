#pragma once

#include "tokattr/model/bundle.hpp"
#include "tokattr/model/forward.hpp"

namespace tokattr::attribution {

// First-order check of a layer's attention delta around its input state
// h = layer_input(layer)[position], with the residual r scaled by `scale`.
// With p = softmax(h U^T) and u_v = U_v . r:
//   gradient_factor      G = p_y (1 - p_y)
//   first_order_estimate   = scale * G * sum_h dz_h      (target term)
//   off_target_term        = scale * p_y * sum_{v != y} p_v u_v
//   actual                 = phi(h + scale r) - phi(h)
// The complete linear term is first_order_estimate - off_target_term, so
//   abs_error          = |actual - (first_order_estimate - off_target_term)|
// is the Taylor remainder and shrinks as scale^2, while
//   target_only_error  = |actual - first_order_estimate|
// keeps the first-order off-target part.
struct TaylorDiagnostic {
  double scale = 1.0;
  double gradient_factor = 0.0;
  double logit_sum = 0.0;
  double first_order_estimate = 0.0;
  double off_target_term = 0.0;
  double actual = 0.0;
  double abs_error = 0.0;
  double target_only_error = 0.0;
};

// Throws IndexError for bad indices and DataError unless 0 < scale <= 1.
TaylorDiagnostic taylor_check(const model::CachedStates& cache, const model::ModelBundle& model, int layer,
                              int position, int target, double scale);

}  // namespace tokattr::attribution
