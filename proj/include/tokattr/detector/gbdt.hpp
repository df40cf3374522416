#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tokattr/detector/config.hpp"

namespace tokattr::detector {

// Split nodes send x[feature] < threshold to `left`. Leaves carry `value`,
// already scaled by the learning rate.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
  double gain = 0.0;

  bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(std::span<const double> row) const;
};

struct Provenance {
  std::string protocol;
  std::uint64_t seed = 0;
  DetectorConfig config;
  double class_weight = 1.0;  // resolved positive weight used for the fit
  std::size_t n_train = 0;
  std::size_t n_validation = 0;
  int best_iteration = -1;  // last kept round when early stopping ran
};

struct DetectorModel {
  std::size_t n_features = 0;
  std::vector<std::string> feature_names;
  std::vector<RegressionTree> trees;
  double base_score = 0.0;  // log-odds
  double threshold = 0.5;
  std::vector<double> importance;  // total split gain per feature
  Provenance provenance;

  double margin(std::span<const double> row) const;
};

// Per-round losses recorded during fitting.
struct TrainTrace {
  std::vector<double> train_loss;       // weighted mean logistic loss on the fit rows
  std::vector<double> validation_loss;  // empty without a validation set
  int best_iteration = -1;
  double class_weight = 1.0;
};

// Gradient boosting with logistic loss and exact greedy splits. With a
// validation set, training stops once the validation loss has not improved
// for `early_stopping_patience` rounds, and the ensemble is truncated to the
// best round. Throws DataError for fewer than 2 samples, a single class, or
// non-finite features.
DetectorModel fit(const Dataset& train, const Dataset* validation, const DetectorConfig& config,
                  TrainTrace* trace = nullptr);

// Splits off a stratified `validation_fraction` of `data` for early stopping
// (0 disables it) and fits on the remainder.
DetectorModel train(const Dataset& data, const DetectorConfig& config, double validation_fraction = 0.0,
                    TrainTrace* trace = nullptr);

// sigmoid(base_score + sum of leaf values). Throws DataError on a dimension
// mismatch or a non-finite feature.
double predict(const DetectorModel& model, std::span<const double> features);

std::vector<double> predict_all(const DetectorModel& model, const Dataset& data);

// Features used in at least one split, by descending total gain (ties by
// feature index).
std::vector<std::pair<std::string, double>> feature_importance(const DetectorModel& model);

// n_neg / n_pos.
double auto_class_weight(std::span<const int> labels);

}  // namespace tokattr::detector
