#include "tokattr/syntax/upos.hpp"

#include "tokattr/error.hpp"

namespace tokattr::syntax {

UposTag parse_tag(std::string_view text) {
  for (std::size_t i = 0; i < kTagCount; ++i) {
    if (kTagNames[i] == text) return static_cast<UposTag>(i);
  }
  return UposTag::X;
}

std::string feature_name(std::size_t column) {
  if (column >= kFeatureDim) throw IndexError("feature column " + std::to_string(column) + " out of range");
  const std::size_t tag = column / kSourceCount;
  const std::size_t source = column % kSourceCount;
  return std::string(kSourceColumnPrefixes[source]) + "_" + std::string(kTagNames[tag]);
}

std::vector<std::string> feature_names() {
  std::vector<std::string> names;
  names.reserve(kFeatureDim);
  for (std::size_t i = 0; i < kFeatureDim; ++i) names.push_back(feature_name(i));
  return names;
}

}  // namespace tokattr::syntax
