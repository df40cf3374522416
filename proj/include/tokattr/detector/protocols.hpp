#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tokattr/detector/config.hpp"
#include "tokattr/detector/folds.hpp"
#include "tokattr/detector/metrics.hpp"
#include "tokattr/detector/search.hpp"

namespace tokattr::detector {

struct ProtocolOptions {
  SearchGrid grid = SearchGrid::default_grid();
  DetectorConfig base;
  std::size_t search_iters = 50;
  std::size_t search_folds = 5;
  std::uint64_t seed = 0;
  bool tune_threshold = false;  // standard split only: pick the threshold on the early-stopping slice
  std::size_t jobs = 1;
};

// One outer fit of a protocol.
struct FoldRecord {
  std::size_t fold = 0;
  IndexSet test;
  IndexSet train;  // indices the search and final fit saw
  DetectorConfig selected;
  double search_score = 0.0;
  double class_weight = 1.0;  // resolved positive weight of the final fit
  std::vector<SearchTrial> trials;
  std::vector<IndexSet> inner_folds;  // test folds of the inner search, as dataset indices
  bool skipped = false;
  std::string skip_reason;
};

struct EvalReport {
  std::string protocol;
  std::uint64_t seed = 0;
  double auc = 0.0;
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
  double threshold = 0.5;
  Confusion confusion;
  std::size_t n_evaluated = 0;
  std::size_t n_outer_fits = 0;
  std::vector<double> scores;  // per evaluated sample, in the order of `labels`
  std::vector<int> labels;
  std::vector<std::size_t> sample_index;  // dataset index of each score
  std::vector<FoldRecord> folds;
  std::vector<std::string> warnings;
};

// Search on `train` only, refit on 85% with early stopping on the other 15%,
// report on `test`.
EvalReport protocol_standard(const Dataset& train, const Dataset& test, const ProtocolOptions& options);

// Stratified k folds; each fold runs its own search on its training part.
// Predictions from all folds are pooled before computing metrics.
EvalReport protocol_stratified_kfold(const Dataset& data, std::size_t k, const ProtocolOptions& options);

// Leave-one-out outer loop over N >= 10 samples. Each inner search (and the
// final fit) sees only the N-1 remaining samples and uses the automatic
// positive class weight of its own training fold. Outer folds whose training
// part holds a single class, or whose inner search cannot draw folds with both
// classes, are skipped with a warning and left out of the metrics.
EvalReport protocol_nested_loocv(const Dataset& data, const ProtocolOptions& options);

// Throws LeakageError if a test index of `record` appears in its training
// part or in any inner search fold. Every protocol runs this on each fold.
void verify_isolation(const FoldRecord& record);

}  // namespace tokattr::detector
