#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "tokattr/attribution/heads.hpp"
#include "tokattr/sources.hpp"

namespace tokattr::attribution {

// Context index sets for one analyzed row. Together they must partition the
// row's causal prefix [0, position].
struct SourceSpans {
  std::vector<std::size_t> query;
  std::vector<std::size_t> rag;
  std::vector<std::size_t> past;
  std::vector<std::size_t> self;

  const std::vector<std::size_t>& operator[](Source s) const;

  // Source label of every index in [0, row_length). Throws SpanError naming
  // the offending indices on overlap, on an index outside the row, or when
  // an index is left unassigned.
  std::vector<Source> labels(std::size_t row_length) const;
};

using SourceShares = std::array<double, kInputSourceCount>;

// Splits each head's probability share over the sources by the attention
// mass it places on each span, normalized by the row's total mass. Each entry
// of `attn_rows` is one head's causal row prefix (length position + 1).
// Throws DataError if a row carries no attention mass.
SourceShares map_sources(const HeadAttribution& heads, std::span<const std::span<const double>> attn_rows,
                         const SourceSpans& spans);

}  // namespace tokattr::attribution
