#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>

#include "tokattr/sources.hpp"
#include "tokattr/syntax/upos.hpp"

namespace tokattr::syntax {

struct FeatureVector {
  std::array<double, kFeatureDim> values{};
  std::optional<int> label;  // 1 = hallucination

  double operator[](std::size_t i) const { return values[i]; }
  double at(UposTag tag, Source source) const { return values[feature_index(tag, source)]; }
};

// Per-tag mean of the token attribution vectors, concatenated in schema
// order; tags with no tokens contribute a zero block. Throws DataError on
// empty input or a length mismatch.
FeatureVector aggregate(std::span<const AttributionVector> vectors, std::span<const UposTag> tags);

}  // namespace tokattr::syntax
