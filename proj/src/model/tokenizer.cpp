#include "tokattr/model/tokenizer.hpp"

#include "tokattr/error.hpp"

namespace tokattr::model {

namespace {
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
}  // namespace

WhitespaceTokenizer::WhitespaceTokenizer(const std::vector<std::string>& vocab) : vocab_(vocab) {
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    // first occurrence wins for duplicated strings
    index_.emplace(vocab[i], static_cast<int>(i));
  }
}

TokenizedText WhitespaceTokenizer::encode(std::string_view text) const {
  TokenizedText out;
  out.text = std::string(text);
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    if (i >= text.size()) break;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    const std::string piece(text.substr(i, j - i));
    auto it = index_.find(piece);
    if (it == index_.end()) {
      throw DataError("word '" + piece + "' at offset " + std::to_string(i) + " is not in the vocabulary");
    }
    out.ids.push_back(it->second);
    out.offsets.push_back({i, j});
    i = j;
  }
  return out;
}

TokenizedText WhitespaceTokenizer::decode(std::span<const int> ids) const {
  TokenizedText out;
  for (int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab_.size()) {
      throw IndexError("token id " + std::to_string(id) + " out of vocabulary range");
    }
    if (!out.text.empty()) out.text += ' ';
    const std::size_t start = out.text.size();
    out.text += vocab_[static_cast<std::size_t>(id)];
    out.ids.push_back(id);
    out.offsets.push_back({start, out.text.size()});
  }
  return out;
}

}  // namespace tokattr::model
