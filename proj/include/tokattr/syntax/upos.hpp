#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "tokattr/sources.hpp"

namespace tokattr::syntax {

// Fixed 18-tag schema: the universal POS set plus SPACE. The enumerator order
// is the feature block order.
enum class UposTag : std::size_t {
  ADJ = 0, ADP, ADV, AUX, CCONJ, DET, INTJ, NOUN, NUM, PART, PRON, PROPN, PUNCT, SCONJ, SYM, VERB, X, SPACE
};

inline constexpr std::size_t kTagCount = 18;
inline constexpr std::size_t kFeatureDim = kTagCount * kSourceCount;  // 126

inline constexpr std::array<std::string_view, kTagCount> kTagNames = {
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X", "SPACE"};

constexpr std::size_t index(UposTag t) { return static_cast<std::size_t>(t); }
inline std::string_view to_string(UposTag t) { return kTagNames[index(t)]; }

// Exact, case-sensitive match against the schema; anything else is X.
UposTag parse_tag(std::string_view text);

// Column of (tag, source) in the feature vector.
constexpr std::size_t feature_index(UposTag tag, Source source) {
  return index(tag) * kSourceCount + tokattr::index(source);
}

// "<SOURCE>_<TAG>", e.g. RAG_NOUN.
std::string feature_name(std::size_t column);
std::vector<std::string> feature_names();

}  // namespace tokattr::syntax
