#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tokattr::detector {

struct DetectorConfig {
  int n_trees = 100;
  int max_depth = 4;
  double learning_rate = 0.1;
  double min_child_weight = 1.0;  // minimum hessian mass per child
  double subsample = 1.0;         // row fraction per tree, in (0, 1]
  double colsample = 1.0;         // feature fraction per tree, in (0, 1]
  double reg_lambda = 1.0;        // L2 penalty on leaf values
  // Weight of each positive sample; nullopt means "auto" = n_neg / n_pos of
  // the training fold.
  std::optional<double> positive_class_weight = 1.0;
  int early_stopping_patience = 50;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const DetectorConfig&) const = default;
};

// Hyperparameter grid. An empty axis keeps the base config's value; the grid
// is the Cartesian product of the non-empty axes.
struct SearchGrid {
  std::vector<int> n_trees;
  std::vector<int> max_depth;
  std::vector<double> learning_rate;
  std::vector<double> min_child_weight;
  std::vector<double> subsample;
  std::vector<double> colsample;

  std::size_t size() const;
  // Mixed-radix decode of `index` (last axis fastest) applied on top of base.
  DetectorConfig at(std::size_t index, const DetectorConfig& base) const;

  // depth 3..8, trees 50..400, learning rate 0.01..0.3, subsample and
  // colsample 0.6..1.0.
  static SearchGrid default_grid();
};

// Features are stored row-major; labels are 0/1.
struct Dataset {
  std::size_t n_features = 0;
  std::vector<double> x;
  std::vector<int> y;
  std::vector<std::string> ids;
  std::vector<std::string> feature_names;

  std::size_t size() const { return y.size(); }
  std::span<const double> row(std::size_t i) const { return {x.data() + i * n_features, n_features}; }
  std::size_t positives() const;
  std::size_t negatives() const { return size() - positives(); }

  void add(std::span<const double> features, int label, std::string id = {});
  Dataset subset(std::span<const std::size_t> indices) const;
  // Throws DataError on NaN/inf features, labels other than 0/1, or ragged rows.
  void validate() const;
};

}  // namespace tokattr::detector
