#include "tokattr/detector/protocols.hpp"

#include <algorithm>

#include "tokattr/detector/gbdt.hpp"
#include "tokattr/error.hpp"
#include "tokattr/util/parallel.hpp"

namespace tokattr::detector {

namespace {

constexpr double kEarlyStopFraction = 0.15;
constexpr std::size_t kMinLoocvSamples = 10;

// Seed streams, kept apart so that adding a stream never shifts another.
constexpr std::uint64_t kSearchStream = 0;
constexpr std::uint64_t kFitStream = 1 << 20;
constexpr std::uint64_t kSplitStream = 2 << 20;
constexpr std::uint64_t kOuterFoldStream = 3 << 20;

IndexSet map_indices(const IndexSet& local, const IndexSet& to_global) {
  IndexSet out;
  out.reserve(local.size());
  for (std::size_t i : local) out.push_back(to_global[i]);
  return out;
}

// Search on data[train], then fit the selected config on all of data[train].
// `record` receives the search trace with indices in `data` coordinates.
DetectorModel search_and_fit(const Dataset& data, FoldRecord& record, const ProtocolOptions& options,
                             const DetectorConfig& base, std::uint64_t fold_stream, const std::string& protocol) {
  const Dataset train = data.subset(record.train);
  const SearchResult search = random_search(train, options.grid, base, options.search_iters, options.search_folds,
                                            derive_seed(options.seed, kSearchStream + fold_stream));
  record.selected = search.best;
  record.selected.seed = derive_seed(options.seed, kFitStream + fold_stream);
  record.search_score = search.best_score;
  record.trials = search.trials;
  for (const auto& inner : search.folds) record.inner_folds.push_back(map_indices(inner, record.train));
  verify_isolation(record);

  TrainTrace trace;
  DetectorModel model = fit(train, nullptr, record.selected, &trace);
  record.class_weight = trace.class_weight;
  model.provenance.protocol = protocol;
  model.provenance.seed = options.seed;
  return model;
}

void finish(EvalReport& report) {
  report.n_evaluated = report.scores.size();
  report.confusion = confusion_at(report.scores, report.labels, report.threshold);
  const auto cls = scores_from(report.confusion);
  report.f1 = cls.f1;
  report.recall = cls.recall;
  report.precision = cls.precision;
  const bool pos = std::ranges::count(report.labels, 1) > 0;
  const bool neg = std::ranges::count(report.labels, 0) > 0;
  if (pos && neg) {
    report.auc = auc(report.scores, report.labels);
  } else {
    report.auc = 0.0;
    report.warnings.push_back("evaluated samples hold a single class; AUC undefined, reported as 0");
  }
}

void require_both_classes(const Dataset& data, const char* what) {
  if (data.positives() == 0 || data.negatives() == 0) {
    throw DataError(std::string(what) + " must contain both classes");
  }
}

}  // namespace

void verify_isolation(const FoldRecord& record) {
  check_isolation(record.test, record.train);
  for (const auto& inner : record.inner_folds) check_isolation(record.test, inner);
}

EvalReport protocol_standard(const Dataset& train, const Dataset& test, const ProtocolOptions& options) {
  train.validate();
  test.validate();
  require_both_classes(train, "training set");
  if (test.size() == 0) throw DataError("test set is empty");
  if (test.n_features != train.n_features) {
    throw DataError("test set has " + std::to_string(test.n_features) + " features, training set has " +
                    std::to_string(train.n_features));
  }

  EvalReport report;
  report.protocol = "split";
  report.seed = options.seed;

  const SearchResult search = random_search(train, options.grid, options.base, options.search_iters,
                                            options.search_folds, derive_seed(options.seed, kSearchStream));
  FoldRecord record;
  record.selected = search.best;
  record.selected.seed = derive_seed(options.seed, kFitStream);
  record.search_score = search.best_score;
  record.trials = search.trials;
  record.inner_folds = search.folds;
  // train and test are separate datasets; test indices live in their own space
  record.train.resize(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) record.train[i] = i;

  const auto [fit_idx, val_idx] = stratified_split(train.y, kEarlyStopFraction, derive_seed(options.seed, kSplitStream));
  check_isolation(val_idx, fit_idx);
  const Dataset fit_set = train.subset(fit_idx);
  const Dataset val_set = train.subset(val_idx);
  TrainTrace trace;
  DetectorModel model = fit(fit_set, val_set.size() > 0 ? &val_set : nullptr, record.selected, &trace);
  record.class_weight = trace.class_weight;

  if (options.tune_threshold && val_set.size() > 0 && val_set.positives() > 0 && val_set.negatives() > 0) {
    report.threshold = tune_threshold(predict_all(model, val_set), val_set.y);
  }

  report.scores = predict_all(model, test);
  report.labels = test.y;
  report.sample_index.resize(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) report.sample_index[i] = i;
  record.test = report.sample_index;
  report.n_outer_fits = 1;
  report.folds.push_back(std::move(record));
  finish(report);
  return report;
}

EvalReport protocol_stratified_kfold(const Dataset& data, std::size_t k, const ProtocolOptions& options) {
  data.validate();
  require_both_classes(data, "dataset");
  EvalReport report;
  report.protocol = "kfold";
  report.seed = options.seed;

  const auto folds = stratified_kfold(data.y, k, derive_seed(options.seed, kOuterFoldStream));
  std::vector<FoldRecord> records(folds.size());
  std::vector<std::vector<double>> fold_scores(folds.size());
  util::parallel_for(folds.size(), options.jobs, [&](std::size_t f) {
    FoldRecord& record = records[f];
    record.fold = f;
    record.test = folds[f];
    record.train = complement(data.size(), folds[f]);
    const DetectorModel model = search_and_fit(data, record, options, options.base, f + 1, report.protocol);
    fold_scores[f] = predict_all(model, data.subset(record.test));
  });

  // pool predictions before computing any metric
  for (std::size_t f = 0; f < folds.size(); ++f) {
    for (std::size_t j = 0; j < folds[f].size(); ++j) {
      report.sample_index.push_back(folds[f][j]);
      report.scores.push_back(fold_scores[f][j]);
      report.labels.push_back(data.y[folds[f][j]]);
    }
  }
  report.n_outer_fits = records.size();
  report.folds = std::move(records);
  finish(report);
  return report;
}

EvalReport protocol_nested_loocv(const Dataset& data, const ProtocolOptions& options) {
  data.validate();
  if (data.size() < kMinLoocvSamples) {
    throw DataError("nested LOOCV needs at least " + std::to_string(kMinLoocvSamples) + " samples, got " +
                    std::to_string(data.size()));
  }
  require_both_classes(data, "dataset");
  EvalReport report;
  report.protocol = "loocv";
  report.seed = options.seed;

  DetectorConfig base = options.base;
  base.positive_class_weight.reset();  // auto: n_neg / n_pos of each training fold

  const std::size_t n = data.size();
  std::vector<FoldRecord> records(n);
  std::vector<double> scores(n, 0.0);
  util::parallel_for(n, options.jobs, [&](std::size_t i) {
    FoldRecord& record = records[i];
    record.fold = i;
    record.test = {i};
    record.train = complement(n, record.test);
    check_isolation(record.test, record.train);
    const bool has_pos = std::ranges::any_of(record.train, [&](std::size_t j) { return data.y[j] == 1; });
    const bool has_neg = std::ranges::any_of(record.train, [&](std::size_t j) { return data.y[j] == 0; });
    if (!has_pos || !has_neg) {
      record.skipped = true;
      record.skip_reason = "training part holds one class";
      return;
    }
    try {
      const DetectorModel model = search_and_fit(data, record, options, base, i + 1, report.protocol);
      scores[i] = predict(model, data.row(i));
    } catch (const DataError& e) {
      record.skipped = true;
      record.skip_reason = e.what();
    }
  });

  for (std::size_t i = 0; i < n; ++i) {
    if (records[i].skipped) {
      report.warnings.push_back("outer fold " + std::to_string(i) + " skipped: " + records[i].skip_reason);
      continue;
    }
    ++report.n_outer_fits;
    report.sample_index.push_back(i);
    report.scores.push_back(scores[i]);
    report.labels.push_back(data.y[i]);
  }
  report.folds = std::move(records);
  finish(report);
  return report;
}

}  // namespace tokattr::detector
