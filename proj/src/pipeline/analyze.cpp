#include "tokattr/pipeline/analyze.hpp"

#include "tokattr/error.hpp"
#include "tokattr/model/forward.hpp"
#include "tokattr/model/tokenizer.hpp"
#include "tokattr/util/parallel.hpp"

namespace tokattr::pipeline {

AttributedResponse analyze_record(const model::ModelBundle& model, const AnalysisRecord& record,
                                  TemplateRoute default_route) {
  validate_record(record, model.config().vocab_size, model.config().max_positions);
  const PreparedSequence seq = prepare(record, default_route);
  const model::CachedStates cache = model::forward_cached(model, seq.tokens);
  std::vector<attribution::TokenAttribution> tokens;
  try {
    tokens = attribution::attribute_response(cache, model, seq.layout);
  } catch (const SpanError& e) {
    throw SpanError("record '" + record.id + "': " + e.what());
  }

  AttributedResponse out;
  out.id = record.id;
  out.label = record.label;
  std::vector<CharSpan> offsets = record.token_offsets;
  if (offsets.empty()) {
    auto decoded = model::WhitespaceTokenizer(model.vocab()).decode(record.response_ids);
    out.response_text = std::move(decoded.text);
    offsets = std::move(decoded.offsets);
  } else {
    out.response_text = record.response_text;
  }
  out.tokens.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    AttributedToken t;
    t.index = i;
    t.position = tokens[i].position;
    t.target = tokens[i].target;
    t.offset = offsets[i];
    t.vector = tokens[i].vector;
    t.p_final = tokens[i].coarse.p_final;
    t.residual = tokens[i].sum_residual;
    out.tokens.push_back(t);
  }
  return out;
}

std::vector<AttributedResponse> analyze_records(const model::ModelBundle& model,
                                                const std::vector<AnalysisRecord>& records,
                                                TemplateRoute default_route, std::size_t jobs) {
  std::vector<AttributedResponse> out(records.size());
  util::parallel_for(records.size(), jobs,
                     [&](std::size_t i) { out[i] = analyze_record(model, records[i], default_route); });
  return out;
}

}  // namespace tokattr::pipeline
