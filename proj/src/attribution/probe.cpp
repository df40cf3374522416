#include "tokattr/attribution/probe.hpp"

#include <cmath>

#include "tokattr/error.hpp"

namespace tokattr::attribution {

namespace {

void check_finite(const Eigen::Ref<const RowVector>& hidden) {
  for (Eigen::Index i = 0; i < hidden.size(); ++i) {
    if (!std::isfinite(hidden[i])) {
      throw NonFiniteError("probe input has a non-finite entry at index " + std::to_string(i));
    }
  }
}

}  // namespace

RowVector probe_distribution(const Eigen::Ref<const RowVector>& hidden, const Matrix& unembedding) {
  check_finite(hidden);
  const RowVector logits = hidden * unembedding.transpose();
  const double max = logits.maxCoeff();
  const RowVector e = (logits.array() - max).exp();
  return e / e.sum();
}

double probe(const Eigen::Ref<const RowVector>& hidden, const Matrix& unembedding, int target) {
  if (target < 0 || target >= unembedding.rows()) {
    throw IndexError("probe target " + std::to_string(target) + " out of range for vocabulary of " +
                     std::to_string(unembedding.rows()));
  }
  check_finite(hidden);
  const RowVector logits = hidden * unembedding.transpose();
  const double max = logits.maxCoeff();
  double denom = 0.0;
  for (Eigen::Index v = 0; v < logits.size(); ++v) denom += std::exp(logits[v] - max);
  return std::exp(logits[target] - max) / denom;
}

double probe(const Eigen::Ref<const RowVector>& hidden, const model::ModelBundle& model, int target) {
  return probe(hidden, model.unembedding(), target);
}

}  // namespace tokattr::attribution
