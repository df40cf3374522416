#pragma once

#include <cstddef>
#include <span>

namespace tokattr::detector {

// Area under the ROC curve: P(score_pos > score_neg) + 0.5 P(tie), computed
// from midranks in O(n log n). Throws DataError unless both classes occur.
double auc(std::span<const double> scores, std::span<const int> labels);

// Positive = hallucination; a sample is predicted positive when
// score >= threshold.
struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
};

Confusion confusion_at(std::span<const double> scores, std::span<const int> labels, double threshold);

struct ClassificationScores {
  double f1 = 0.0;
  double recall = 0.0;
  double precision = 0.0;
};

// Undefined ratios (no positives, no positive predictions) are reported as 0.
ClassificationScores scores_from(const Confusion& c);
ClassificationScores f1_recall(std::span<const double> scores, std::span<const int> labels, double threshold = 0.5);

// Threshold in (0, 1) maximizing F1 on the given scores; candidates are the
// midpoints between consecutive distinct scores plus 0.5. Ties keep the
// candidate closest to 0.5.
double tune_threshold(std::span<const double> scores, std::span<const int> labels);

}  // namespace tokattr::detector
