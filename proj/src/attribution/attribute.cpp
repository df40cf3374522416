#include "tokattr/attribution/attribute.hpp"

#include <algorithm>
#include <cmath>
#include <span>

#include "tokattr/error.hpp"

namespace tokattr::attribution {

TokenAttribution attribute_token(const model::CachedStates& cache, const model::ModelBundle& model, int position,
                                 int target, const SourceSpans& spans) {
  TokenAttribution out;
  out.position = position;
  out.target = target;
  out.coarse = decompose_coarse(cache, model, position, target);

  const int n_layers = cache.n_layers();
  const int n_heads = model.config().n_heads;
  const auto row_length = static_cast<std::size_t>(position) + 1;

  AttributionVector& v = out.vector;
  v[Source::initial] = out.coarse.p_initial;
  v[Source::ln] = out.coarse.ln_delta;
  out.layers.reserve(static_cast<std::size_t>(n_layers));
  std::vector<std::span<const double>> rows(static_cast<std::size_t>(n_heads));
  for (int l = 0; l < n_layers; ++l) {
    v[Source::ffn] += out.coarse.ffn_delta[l];

    LayerAttribution layer;
    const auto logits = head_logit_contributions(cache, model, l, position, target);
    layer.heads = apportion_heads(out.coarse.att_delta[l], logits);
    for (int h = 0; h < n_heads; ++h) {
      rows[h] = std::span<const double>(cache.attn[l][h].row(position).data(), row_length);
    }
    layer.sources = map_sources(layer.heads, rows, spans);
    for (std::size_t s = 0; s < kInputSourceCount; ++s) v.values[s] += layer.sources[s];
    out.layers.push_back(std::move(layer));
  }
  out.sum_residual = std::abs(v.sum() - out.coarse.p_final);
  return out;
}

SourceSpans spans_for_row(const ContextLayout& layout, std::size_t position) {
  SourceSpans spans;
  auto copy_without = [position](const std::vector<std::size_t>& from, std::vector<std::size_t>& to) {
    for (std::size_t k : from) {
      if (k != position && k <= position) to.push_back(k);
    }
  };
  copy_without(layout.query, spans.query);
  copy_without(layout.rag, spans.rag);
  for (std::size_t k = layout.response_start; k < position; ++k) spans.past.push_back(k);
  spans.self.push_back(position);
  return spans;
}

std::vector<TokenAttribution> attribute_response(const model::CachedStates& cache, const model::ModelBundle& model,
                                                 const ContextLayout& layout) {
  const auto length = static_cast<std::size_t>(cache.length());
  if (layout.response_start < 1) throw SpanError("a response needs at least one context token before it");
  if (layout.response_start >= length) throw SpanError("response is empty");
  std::vector<TokenAttribution> out;
  out.reserve(length - layout.response_start);
  for (std::size_t i = layout.response_start; i < length; ++i) {
    const std::size_t row = i - 1;
    out.push_back(attribute_token(cache, model, static_cast<int>(row), cache.tokens[i], spans_for_row(layout, row)));
  }
  return out;
}

}  // namespace tokattr::attribution
