#include "tokattr/syntax/alignment.hpp"

#include <algorithm>

#include "tokattr/error.hpp"

namespace tokattr::syntax {

namespace {

std::size_t overlap(const CharSpan& a, const CharSpan& b) {
  const std::size_t lo = std::max(a.start, b.start);
  const std::size_t hi = std::min(a.end, b.end);
  return hi > lo ? hi - lo : 0;
}

void check_span(const CharSpan& s, std::size_t text_length, const char* what, std::size_t i) {
  if (s.start > s.end || s.end > text_length) {
    throw DataError(std::string(what) + " " + std::to_string(i) + " has offsets [" + std::to_string(s.start) +
                    ", " + std::to_string(s.end) + ") outside text of length " + std::to_string(text_length));
  }
}

}  // namespace

AlignmentMap align(std::span<const CharSpan> tokens, std::span<const TaggedWord> words, std::size_t text_length) {
  for (std::size_t w = 0; w < words.size(); ++w) {
    check_span(words[w].span, text_length, "word", w);
    if (words[w].span.start >= words[w].span.end) throw DataError("word " + std::to_string(w) + " is empty");
    if (w > 0 && words[w].span.start < words[w - 1].span.end) {
      throw DataError("word " + std::to_string(w) + " overlaps or precedes word " + std::to_string(w - 1));
    }
  }

  AlignmentMap map;
  map.word_to_tokens.resize(words.size());
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    check_span(tokens[t], text_length, "token", t);
    // first word that could overlap: words are sorted and disjoint
    auto first = std::partition_point(words.begin(), words.end(),
                                      [&](const TaggedWord& w) { return w.span.end <= tokens[t].start; });
    std::size_t best_word = 0;
    std::size_t best_overlap = 0;
    for (auto it = first; it != words.end() && it->span.start < tokens[t].end; ++it) {
      const std::size_t o = overlap(tokens[t], it->span);
      if (o > best_overlap) {
        best_overlap = o;
        best_word = static_cast<std::size_t>(it - words.begin());
      }
    }
    if (best_overlap == 0) {
      map.unaligned.push_back(t);
    } else {
      map.word_to_tokens[best_word].push_back(t);
    }
  }
  return map;
}

std::vector<UposTag> propagate_tags(const AlignmentMap& map, std::span<const TaggedWord> words,
                                    std::size_t n_tokens) {
  if (map.word_to_tokens.size() != words.size()) {
    throw DataError("alignment map covers " + std::to_string(map.word_to_tokens.size()) + " words, got " +
                    std::to_string(words.size()));
  }
  std::vector<UposTag> tags(n_tokens, UposTag::X);
  std::vector<bool> seen(n_tokens, false);
  auto mark = [&](std::size_t t) {
    if (t >= n_tokens) throw DataError("alignment references token " + std::to_string(t) + " beyond response");
    if (seen[t]) throw DataError("token " + std::to_string(t) + " aligned more than once");
    seen[t] = true;
  };
  for (std::size_t w = 0; w < words.size(); ++w) {
    for (std::size_t t : map.word_to_tokens[w]) {
      mark(t);
      tags[t] = words[w].tag;
    }
  }
  for (std::size_t t : map.unaligned) mark(t);
  for (std::size_t t = 0; t < n_tokens; ++t) {
    if (!seen[t]) throw DataError("token " + std::to_string(t) + " is neither aligned nor marked unaligned");
  }
  return tags;
}

}  // namespace tokattr::syntax
