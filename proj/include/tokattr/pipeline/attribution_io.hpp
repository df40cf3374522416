#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tokattr/sources.hpp"
#include "tokattr/text_span.hpp"

namespace tokattr::pipeline {

struct AttributedToken {
  std::size_t index = 0;  // position within the response
  int position = 0;       // predicting row in the full sequence
  int target = 0;
  CharSpan offset;
  AttributionVector vector;
  double p_final = 0.0;
  double residual = 0.0;  // |vector.sum() - p_final|
};

struct AttributedResponse {
  std::string id;
  std::optional<int> label;
  std::string response_text;
  std::vector<AttributedToken> tokens;

  std::vector<AttributionVector> vectors() const;
  std::vector<CharSpan> offsets() const;
  double max_residual() const;
};

// JSON lines: a {"kind": "record", ...} header per response followed by one
// {"kind": "token", ...} line per response token.
void write_attributions(std::ostream& out, const AttributedResponse& response);
std::vector<AttributedResponse> read_attributions(std::istream& in);

}  // namespace tokattr::pipeline
