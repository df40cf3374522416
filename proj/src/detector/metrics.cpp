#include "tokattr/detector/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "tokattr/error.hpp"

namespace tokattr::detector {

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DataError("scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of midranks (1-based) of the positives, in doubled units to stay integral.
  long double rank_sum2 = 0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const std::size_t doubled_midrank = i + j + 1;  // 2 * ((i+1 + j) / 2)
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) {
        rank_sum2 += doubled_midrank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw DataError("AUC needs both classes");
  const long double u = rank_sum2 / 2 - static_cast<long double>(n_pos) * (n_pos + 1) / 2;
  return static_cast<double>(u / (static_cast<long double>(n_pos) * n_neg));
}

Confusion confusion_at(std::span<const double> scores, std::span<const int> labels, double threshold) {
  if (scores.size() != labels.size()) throw DataError("scores and labels differ in length");
  Confusion c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (labels[i] == 1) {
      (predicted ? c.tp : c.fn)++;
    } else {
      (predicted ? c.fp : c.tn)++;
    }
  }
  return c;
}

ClassificationScores scores_from(const Confusion& c) {
  ClassificationScores s;
  if (c.tp + c.fn > 0) s.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  if (c.tp + c.fp > 0) s.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  if (s.precision + s.recall > 0) s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

ClassificationScores f1_recall(std::span<const double> scores, std::span<const int> labels, double threshold) {
  return scores_from(confusion_at(scores, labels, threshold));
}

double tune_threshold(std::span<const double> scores, std::span<const int> labels) {
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<double> candidates{0.5};
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) candidates.push_back(0.5 * (sorted[i] + sorted[i + 1]));

  double best = 0.5;
  double best_f1 = -1.0;
  for (double t : candidates) {
    if (!(t > 0.0 && t < 1.0)) continue;
    const double f1 = f1_recall(scores, labels, t).f1;
    if (f1 > best_f1 || (f1 == best_f1 && std::abs(t - 0.5) < std::abs(best - 0.5))) {
      best_f1 = f1;
      best = t;
    }
  }
  return best;
}

}  // namespace tokattr::detector
