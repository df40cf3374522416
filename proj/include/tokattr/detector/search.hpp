#pragma once

#include <cstdint>
#include <vector>

#include "tokattr/detector/config.hpp"
#include "tokattr/detector/folds.hpp"

namespace tokattr::detector {

struct SearchTrial {
  std::size_t grid_index = 0;
  DetectorConfig config;
  double score = 0.0;  // mean F1 over the CV folds
  std::vector<double> fold_scores;
  std::vector<double> fold_class_weights;  // resolved positive weight per inner fit
};

struct SearchResult {
  DetectorConfig best;
  double best_score = 0.0;
  std::vector<SearchTrial> trials;  // in sampling order
  std::vector<IndexSet> folds;      // test folds, indices into the searched dataset
};

// Randomized search: draws min(n_iters, grid.size()) distinct grid points
// uniformly without replacement, scores each by stratified n_folds CV F1 on
// `data` (threshold 0.5), and returns the best; ties keep the earlier draw.
// All trials share one fold partition. A partition where some fold lacks a
// class is redrawn up to 8 times before DataError is thrown.
SearchResult random_search(const Dataset& data, const SearchGrid& grid, const DetectorConfig& base,
                           std::size_t n_iters, std::size_t n_folds, std::uint64_t seed);

}  // namespace tokattr::detector
