#pragma once

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tokattr/text_span.hpp"

namespace tokattr::model {

struct TokenizedText {
  std::string text;
  std::vector<int> ids;
  std::vector<CharSpan> offsets;  // one per id, into `text`
};

// Demo-only tokenizer: splits on ASCII whitespace and looks each piece up
// verbatim in the vocabulary. Unknown pieces raise DataError.
class WhitespaceTokenizer {
 public:
  explicit WhitespaceTokenizer(const std::vector<std::string>& vocab);

  TokenizedText encode(std::string_view text) const;

  // Joins vocabulary strings with single spaces and records offsets.
  TokenizedText decode(std::span<const int> ids) const;

 private:
  const std::vector<std::string>& vocab_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace tokattr::model
