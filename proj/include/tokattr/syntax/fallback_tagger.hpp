#pragma once

#include <string_view>
#include <vector>

#include "tokattr/syntax/alignment.hpp"

namespace tokattr::syntax {

// Rule-based tagger so the pipeline runs without an external POS tool.
//
// Segmentation: runs of word characters (ASCII alphanumerics, '_', and any
// byte >= 0x80) form words. An apostrophe or hyphen between two word
// characters, or a '.' or ',' between two digits, stays inside the word.
// Every other non-space byte is a one-character word.
//
// Tags, first match wins: punctuation -> PUNCT; numerals -> NUM; closed-class
// lexicon (DET, ADP, PRON, AUX, CCONJ, SCONJ, PART); capitalized word not at
// sentence start -> PROPN; otherwise NOUN. Verbs and adjectives are not
// recognized.
std::vector<TaggedWord> builtin_fallback_tagger(std::string_view text);

}  // namespace tokattr::syntax
