#include "tokattr/detector/folds.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "tokattr/error.hpp"

namespace tokattr::detector {

namespace {

std::pair<IndexSet, IndexSet> by_class(std::span<const int> labels) {
  IndexSet pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == 1 ? pos : neg).push_back(i);
  return {pos, neg};
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 over (seed, stream)
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<IndexSet> stratified_kfold(std::span<const int> labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("k-fold needs k >= 2");
  if (k > labels.size()) {
    throw ConfigError("cannot split " + std::to_string(labels.size()) + " samples into " + std::to_string(k) +
                      " folds");
  }
  auto [pos, neg] = by_class(labels);
  std::mt19937_64 rng(seed);
  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);

  std::vector<IndexSet> folds(k);
  std::size_t slot = 0;
  for (std::size_t i : pos) folds[slot++ % k].push_back(i);
  for (std::size_t i : neg) folds[slot++ % k].push_back(i);
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

std::pair<IndexSet, IndexSet> stratified_split(std::span<const int> labels, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("holdout fraction must lie in (0, 1)");
  auto [pos, neg] = by_class(labels);
  std::mt19937_64 rng(seed);
  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);
  IndexSet fit, holdout;
  auto deal = [&](const IndexSet& cls) {
    auto n_hold = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(cls.size())));
    // keep at least one sample of the class for fitting
    if (n_hold >= cls.size() && !cls.empty()) n_hold = cls.size() - 1;
    holdout.insert(holdout.end(), cls.begin(), cls.begin() + static_cast<std::ptrdiff_t>(n_hold));
    fit.insert(fit.end(), cls.begin() + static_cast<std::ptrdiff_t>(n_hold), cls.end());
  };
  deal(pos);
  deal(neg);
  std::sort(fit.begin(), fit.end());
  std::sort(holdout.begin(), holdout.end());
  return {fit, holdout};
}

IndexSet complement(std::size_t n, std::span<const std::size_t> excluded) {
  std::vector<char> drop(n, 0);
  for (std::size_t i : excluded) {
    if (i < n) drop[i] = 1;
  }
  IndexSet out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!drop[i]) out.push_back(i);
  }
  return out;
}

void check_isolation(std::span<const std::size_t> test, std::span<const std::size_t> train) {
  IndexSet sorted_train(train.begin(), train.end());
  std::sort(sorted_train.begin(), sorted_train.end());
  for (std::size_t i : test) {
    if (std::binary_search(sorted_train.begin(), sorted_train.end(), i)) {
      throw LeakageError("sample " + std::to_string(i) + " appears in both the test and the training set");
    }
  }
}

}  // namespace tokattr::detector
