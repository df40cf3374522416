#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace tokattr::detector {

using IndexSet = std::vector<std::size_t>;

// Test folds of a stratified k-fold partition. Each class is shuffled with
// the seed and dealt round-robin (positives first, negatives continuing from
// where the positives stopped), so fold sizes and per-fold positive counts
// differ by at most one. Every index appears in exactly one fold, sorted.
std::vector<IndexSet> stratified_kfold(std::span<const int> labels, std::size_t k, std::uint64_t seed);

// Stratified holdout: returns (fit, holdout) with round(fraction * n_class)
// samples of each class held out.
std::pair<IndexSet, IndexSet> stratified_split(std::span<const int> labels, double fraction, std::uint64_t seed);

// Indices in [0, n) not in `excluded`.
IndexSet complement(std::size_t n, std::span<const std::size_t> excluded);

// Throws LeakageError naming the first index found in both sets.
void check_isolation(std::span<const std::size_t> test, std::span<const std::size_t> train);

// Stable per-fold/per-trial seed derivation.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace tokattr::detector
