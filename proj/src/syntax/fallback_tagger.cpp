#include "tokattr/syntax/fallback_tagger.hpp"

#include <cctype>
#include <string>
#include <unordered_map>

namespace tokattr::syntax {

namespace {

bool is_word_byte(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }
bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }
bool is_space(unsigned char c) { return std::isspace(c) != 0; }

const std::unordered_map<std::string, UposTag>& lexicon() {
  static const std::unordered_map<std::string, UposTag> table = [] {
    std::unordered_map<std::string, UposTag> t;
    auto add = [&](UposTag tag, std::initializer_list<const char*> words) {
      for (const char* w : words) t.emplace(w, tag);
    };
    add(UposTag::DET, {"the", "a", "an", "this", "that", "these", "those", "every", "each", "some", "any", "no",
                       "all", "both", "either", "neither", "another"});
    add(UposTag::ADP, {"in", "on", "at", "of", "to", "for", "with", "by", "from", "about", "into", "over", "under",
                       "after", "before", "between", "through", "during", "without", "within", "against", "among",
                       "across", "around", "behind", "beyond", "near", "since", "until", "upon", "via"});
    add(UposTag::PRON, {"i", "you", "he", "she", "it", "we", "they", "me", "him", "her", "us", "them", "my",
                        "your", "his", "its", "our", "their", "mine", "yours", "ours", "theirs", "who", "whom",
                        "whose", "which", "what", "myself", "yourself", "himself", "herself", "itself",
                        "ourselves", "themselves"});
    add(UposTag::AUX, {"is", "are", "was", "were", "be", "been", "being", "am", "has", "have", "had", "do", "does",
                       "did", "will", "would", "can", "could", "shall", "should", "may", "might", "must"});
    add(UposTag::CCONJ, {"and", "or", "but", "nor", "yet", "so"});
    add(UposTag::SCONJ, {"if", "because", "although", "though", "while", "unless", "whether", "whereas"});
    add(UposTag::PART, {"not"});
    return t;
  }();
  return table;
}

bool is_numeral(std::string_view word) {
  bool digit = false;
  for (unsigned char c : word) {
    if (is_digit(c)) {
      digit = true;
    } else if (c != '.' && c != ',') {
      return false;
    }
  }
  return digit;
}

std::string lower(std::string_view word) {
  std::string out(word);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::vector<TaggedWord> builtin_fallback_tagger(std::string_view text) {
  std::vector<CharSpan> spans;
  std::size_t i = 0;
  const std::size_t n = text.size();
  auto at = [&](std::size_t k) { return static_cast<unsigned char>(text[k]); };
  while (i < n) {
    if (is_space(at(i))) {
      ++i;
      continue;
    }
    if (!is_word_byte(at(i))) {
      spans.push_back({i, i + 1});
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < n) {
      if (is_word_byte(at(j))) {
        ++j;
      } else if (j + 1 < n && (at(j) == '\'' || at(j) == '-') && is_word_byte(at(j - 1)) && is_word_byte(at(j + 1))) {
        j += 2;
      } else if (j + 1 < n && (at(j) == '.' || at(j) == ',') && is_digit(at(j - 1)) && is_digit(at(j + 1))) {
        j += 2;
      } else {
        break;
      }
    }
    spans.push_back({i, j});
    i = j;
  }

  std::vector<TaggedWord> words;
  words.reserve(spans.size());
  bool sentence_start = true;
  for (const CharSpan& span : spans) {
    const std::string_view w = text.substr(span.start, span.length());
    UposTag tag;
    if (!is_word_byte(static_cast<unsigned char>(w.front()))) {
      tag = UposTag::PUNCT;
    } else if (is_numeral(w)) {
      tag = UposTag::NUM;
    } else if (auto it = lexicon().find(lower(w)); it != lexicon().end()) {
      tag = it->second;
    } else if (std::isupper(static_cast<unsigned char>(w.front())) && !sentence_start) {
      tag = UposTag::PROPN;
    } else {
      tag = UposTag::NOUN;
    }
    words.push_back({std::string(w), span, tag});
    sentence_start = w == "." || w == "!" || w == "?";
  }
  return words;
}

}  // namespace tokattr::syntax
