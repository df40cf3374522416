#pragma once

#include <cstddef>
#include <vector>

#include "tokattr/attribution/coarse.hpp"
#include "tokattr/attribution/heads.hpp"
#include "tokattr/attribution/sources.hpp"
#include "tokattr/sources.hpp"

namespace tokattr::attribution {

struct LayerAttribution {
  HeadAttribution heads;
  SourceShares sources{};  // Query, RAG, Past, Self
};

struct TokenAttribution {
  int position = 0;  // predicting row
  int target = 0;
  AttributionVector vector;
  CoarseDecomposition coarse;
  std::vector<LayerAttribution> layers;
  double sum_residual = 0.0;  // |vector.sum() - p_final|
};

TokenAttribution attribute_token(const model::CachedStates& cache, const model::ModelBundle& model, int position,
                                 int target, const SourceSpans& spans);

// Layout of a teacher-forced sequence: context indices (query incl. any
// template tokens routed to it, and RAG) followed by the response, which
// starts at `response_start` and runs to the end of the sequence.
struct ContextLayout {
  std::vector<std::size_t> query;
  std::vector<std::size_t> rag;
  std::size_t response_start = 0;
};

// Spans for the row at `position`: Self is the row itself, Past the response
// tokens before it, Query and RAG the layout's sets minus the row. When the
// first response token is predicted the row is the last context token, which
// then counts as Self.
SourceSpans spans_for_row(const ContextLayout& layout, std::size_t position);

// Attributes every response token: token i of the response is predicted by
// row response_start + i - 1. Requires response_start >= 1.
std::vector<TokenAttribution> attribute_response(const model::CachedStates& cache, const model::ModelBundle& model,
                                                 const ContextLayout& layout);

}  // namespace tokattr::attribution
