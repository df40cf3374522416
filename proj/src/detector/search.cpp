#include "tokattr/detector/search.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "tokattr/detector/gbdt.hpp"
#include "tokattr/detector/metrics.hpp"
#include "tokattr/error.hpp"

namespace tokattr::detector {

namespace {

constexpr int kMaxFoldDraws = 8;

bool has_both_classes(const Dataset& data, const IndexSet& idx) {
  bool pos = false, neg = false;
  for (std::size_t i : idx) (data.y[i] == 1 ? pos : neg) = true;
  return pos && neg;
}

}  // namespace

SearchResult random_search(const Dataset& data, const SearchGrid& grid, const DetectorConfig& base,
                           std::size_t n_iters, std::size_t n_folds, std::uint64_t seed) {
  if (n_iters < 1) throw ConfigError("random search needs at least one iteration");
  if (grid.size() < 1) throw ConfigError("search grid is empty");
  data.validate();

  SearchResult result;
  std::vector<IndexSet> train_folds;
  for (int draw = 0;; ++draw) {
    if (draw == kMaxFoldDraws) {
      throw DataError("could not draw " + std::to_string(n_folds) + " folds with both classes in every fold (" +
                      std::to_string(data.positives()) + " positives, " + std::to_string(data.negatives()) +
                      " negatives)");
    }
    result.folds = stratified_kfold(data.y, n_folds, derive_seed(seed, 1000 + static_cast<std::uint64_t>(draw)));
    train_folds.clear();
    bool ok = true;
    for (const auto& test : result.folds) {
      train_folds.push_back(complement(data.size(), test));
      ok = ok && has_both_classes(data, test) && has_both_classes(data, train_folds.back());
    }
    if (ok) break;
  }

  std::vector<std::size_t> order(grid.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(std::min(n_iters, order.size()));

  std::vector<Dataset> fold_train, fold_test;
  for (std::size_t f = 0; f < result.folds.size(); ++f) {
    check_isolation(result.folds[f], train_folds[f]);
    fold_train.push_back(data.subset(train_folds[f]));
    fold_test.push_back(data.subset(result.folds[f]));
  }

  bool have_best = false;
  for (std::size_t grid_index : order) {
    SearchTrial trial;
    trial.grid_index = grid_index;
    trial.config = grid.at(grid_index, base);
    for (std::size_t f = 0; f < result.folds.size(); ++f) {
      TrainTrace trace;
      const DetectorModel model = fit(fold_train[f], nullptr, trial.config, &trace);
      const auto scores = predict_all(model, fold_test[f]);
      trial.fold_scores.push_back(f1_recall(scores, fold_test[f].y, 0.5).f1);
      trial.fold_class_weights.push_back(trace.class_weight);
    }
    trial.score = std::accumulate(trial.fold_scores.begin(), trial.fold_scores.end(), 0.0) /
                  static_cast<double>(trial.fold_scores.size());
    if (!have_best || trial.score > result.best_score) {
      have_best = true;
      result.best_score = trial.score;
      result.best = trial.config;
    }
    result.trials.push_back(std::move(trial));
  }
  return result;
}

}  // namespace tokattr::detector
