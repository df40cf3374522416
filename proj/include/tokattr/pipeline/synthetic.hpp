#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tokattr/model/config.hpp"
#include "tokattr/pipeline/attribution_io.hpp"
#include "tokattr/pipeline/records.hpp"
#include "tokattr/syntax/upos.hpp"

namespace tokattr::pipeline {

// Word list for synthetic corpora: closed-class words the fallback tagger
// knows, plain nouns and numerals.
std::vector<std::string> synthetic_vocabulary();

// Toy model config sized for the synthetic corpus.
model::ModelConfig synthetic_model_config();

// `n` records over `vocab` (which must contain synthetic_vocabulary() as its
// first entries). Exactly round(n * positive_fraction) records, at seeded
// positions, are labeled 1. Every response contains at least one noun and one
// numeral and carries its detokenized text and offsets.
std::vector<AnalysisRecord> synthetic_records(const std::vector<std::string>& vocab, std::size_t n,
                                              std::uint64_t seed, double positive_fraction = 0.5);

// Plants the detection signal into positively labeled responses, keeping each
// token's total attribution unchanged: on NOUN tokens `strength` standard
// deviations of RAG mass move to FFN, on NUM tokens `strength` standard
// deviations of LN mass move in from FFN. Deviations are token-level over
// the whole corpus. `tags[i]` holds the per-token tags of responses[i].
void plant_signal(std::vector<AttributedResponse>& responses, std::span<const std::vector<syntax::UposTag>> tags,
                  double strength);

}  // namespace tokattr::pipeline
