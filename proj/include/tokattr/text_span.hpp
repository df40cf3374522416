#pragma once

#include <cstddef>

namespace tokattr {

// Half-open byte range [start, end) into a UTF-8 string.
struct CharSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end > start ? end - start : 0; }
  bool operator==(const CharSpan&) const = default;
};

}  // namespace tokattr
