#pragma once

#include "tokattr/linalg.hpp"
#include "tokattr/model/bundle.hpp"

namespace tokattr::attribution {

// Probability of `target` when an intermediate hidden row is unembedded
// directly: softmax(hidden * U^T)[target]. No final norm is applied; the
// final-norm adjustment is accounted for separately as the LN source.
double probe(const Eigen::Ref<const RowVector>& hidden, const Matrix& unembedding, int target);
double probe(const Eigen::Ref<const RowVector>& hidden, const model::ModelBundle& model, int target);

// Full softmax(hidden * U^T), max-subtracted.
RowVector probe_distribution(const Eigen::Ref<const RowVector>& hidden, const Matrix& unembedding);

}  // namespace tokattr::attribution
