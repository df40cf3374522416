#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tokattr/detector/config.hpp"
#include "tokattr/pipeline/attribution_io.hpp"
#include "tokattr/syntax/aggregate.hpp"
#include "tokattr/syntax/alignment.hpp"

namespace tokattr::pipeline {

struct ResponseFeatures {
  std::string id;
  syntax::FeatureVector features;
  std::vector<syntax::UposTag> token_tags;
  std::size_t unaligned = 0;
};

// Aligns the response tokens to `words`, propagates tags and aggregates.
ResponseFeatures extract_features(const AttributedResponse& response, std::span<const syntax::TaggedWord> words);

// Columns: id, label, then the 126 feature names. An unknown label is left
// empty. Floats use the shortest representation that round-trips.
void write_features_csv(std::ostream& out, std::span<const ResponseFeatures> rows);

// Reads a CSV written by write_features_csv. Rows without a label are
// rejected, since every consumer trains or evaluates.
detector::Dataset read_features_csv(std::istream& in);

std::string format_double(double v);

}  // namespace tokattr::pipeline
