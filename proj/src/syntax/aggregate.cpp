#include "tokattr/syntax/aggregate.hpp"

#include "tokattr/error.hpp"

namespace tokattr::syntax {

FeatureVector aggregate(std::span<const AttributionVector> vectors, std::span<const UposTag> tags) {
  if (vectors.empty()) throw DataError("cannot aggregate an empty response");
  if (vectors.size() != tags.size()) {
    throw DataError("got " + std::to_string(vectors.size()) + " attribution vectors but " +
                    std::to_string(tags.size()) + " tags");
  }
  std::array<std::array<double, kSourceCount>, kTagCount> sums{};
  std::array<std::size_t, kTagCount> counts{};
  for (std::size_t t = 0; t < vectors.size(); ++t) {
    const std::size_t tag = index(tags[t]);
    ++counts[tag];
    for (std::size_t s = 0; s < kSourceCount; ++s) sums[tag][s] += vectors[t].values[s];
  }
  FeatureVector out;
  for (std::size_t tag = 0; tag < kTagCount; ++tag) {
    if (counts[tag] == 0) continue;
    for (std::size_t s = 0; s < kSourceCount; ++s) {
      out.values[tag * kSourceCount + s] = sums[tag][s] / static_cast<double>(counts[tag]);
    }
  }
  return out;
}

}  // namespace tokattr::syntax
