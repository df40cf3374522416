#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tokattr/attribution/attribute.hpp"
#include "tokattr/text_span.hpp"

namespace tokattr::pipeline {

enum class TemplateRoute { query, rag };

std::string_view to_string(TemplateRoute route);
TemplateRoute parse_template_route(std::string_view text);

// One response to analyze. The teacher-forced sequence is
// [template, query, rag, response]. Template tokens (prompt scaffolding,
// special tokens) count as Query unless routed elsewhere.
struct AnalysisRecord {
  std::string id;
  std::vector<int> template_ids;
  std::optional<TemplateRoute> template_route;  // per-record override
  std::vector<int> query_ids;
  std::vector<int> rag_ids;
  std::vector<int> response_ids;
  // Explicit Query/RAG positions within the context, replacing the default
  // routing. Together they must cover the context exactly once.
  std::optional<std::vector<std::size_t>> query_positions;
  std::optional<std::vector<std::size_t>> rag_positions;
  std::optional<int> label;  // 1 = hallucination
  // Detokenized response and one character span per response token. When
  // both are absent they are rebuilt from the vocabulary.
  std::string response_text;
  std::vector<CharSpan> token_offsets;

  std::size_t context_length() const { return template_ids.size() + query_ids.size() + rag_ids.size(); }
};

struct PreparedSequence {
  std::vector<int> tokens;
  attribution::ContextLayout layout;
};

// Throws DataError naming the record on an empty response, an empty context,
// an id outside [0, vocab_size), a sequence longer than max_positions, a
// label other than 0/1, or offsets inconsistent with the response. Explicit
// positions past the context raise SpanError; overlaps surface as SpanError
// during attribution.
void validate_record(const AnalysisRecord& record, int vocab_size, int max_positions);

PreparedSequence prepare(const AnalysisRecord& record, TemplateRoute default_route = TemplateRoute::query);

// JSON lines:
//   {"id", "template_ids"?, "template_route"?, "query_ids", "rag_ids",
//    "response_ids", "query_positions"?, "rag_positions"?, "label"?,
//    "response_text"?, "token_offsets"?: [[s, e], ...]}
std::vector<AnalysisRecord> read_records(std::istream& in);
void write_record(std::ostream& out, const AnalysisRecord& record);

// Text-demo form: {"id", "query", "rag", "response", "label"?} with
// whitespace-separated words looked up in `vocab`.
std::vector<AnalysisRecord> read_text_records(std::istream& in, const std::vector<std::string>& vocab);

}  // namespace tokattr::pipeline
