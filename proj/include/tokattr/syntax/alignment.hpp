#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tokattr/syntax/upos.hpp"
#include "tokattr/text_span.hpp"

namespace tokattr::syntax {

struct TaggedWord {
  std::string text;
  CharSpan span;
  UposTag tag = UposTag::X;
};

struct AlignmentMap {
  std::vector<std::vector<std::size_t>> word_to_tokens;  // ordered token indices per word
  std::vector<std::size_t> unaligned;                     // tokens overlapping no word
};

// Assigns each token to the word it overlaps most (by characters), ties to the
// earlier word; tokens overlapping nothing are unaligned. All offsets index
// the same detokenized string of length `text_length`.
AlignmentMap align(std::span<const CharSpan> tokens, std::span<const TaggedWord> words, std::size_t text_length);

// Sub-word tokens inherit their word's tag; unaligned tokens get X.
std::vector<UposTag> propagate_tags(const AlignmentMap& map, std::span<const TaggedWord> words,
                                    std::size_t n_tokens);

}  // namespace tokattr::syntax
