#include "tokattr/attribution/sources.hpp"

#include <optional>
#include <sstream>
#include <string>

#include "tokattr/error.hpp"

namespace tokattr::attribution {

namespace {

std::string join(const std::vector<std::size_t>& xs) {
  std::ostringstream out;
  for (std::size_t i = 0; i < xs.size(); ++i) out << (i ? ", " : "") << xs[i];
  return out.str();
}

std::string source_name(Source s) { return std::string(kSourceNames[index(s)]); }

}  // namespace

const std::vector<std::size_t>& SourceSpans::operator[](Source s) const {
  switch (s) {
    case Source::query: return query;
    case Source::rag: return rag;
    case Source::past: return past;
    case Source::self: return self;
    default: break;
  }
  throw SpanError("only Query, RAG, Past and Self are context sources");
}

std::vector<Source> SourceSpans::labels(std::size_t row_length) const {
  std::vector<std::optional<Source>> assigned(row_length);
  std::vector<std::size_t> outside;
  std::ostringstream overlaps;
  bool any_overlap = false;
  for (Source s : {Source::query, Source::rag, Source::past, Source::self}) {
    for (std::size_t k : (*this)[s]) {
      if (k >= row_length) {
        outside.push_back(k);
        continue;
      }
      if (assigned[k] && *assigned[k] != s) {
        overlaps << (any_overlap ? "; " : "") << "index " << k << " in both " << source_name(*assigned[k])
                 << " and " << source_name(s);
        any_overlap = true;
      }
      assigned[k] = s;
    }
  }
  if (any_overlap) throw SpanError("source spans overlap: " + overlaps.str());
  if (!outside.empty()) {
    throw SpanError("source span indices outside the attended row of length " + std::to_string(row_length) +
                    ": " + join(outside));
  }
  std::vector<std::size_t> missing;
  std::vector<Source> labels(row_length);
  for (std::size_t k = 0; k < row_length; ++k) {
    if (!assigned[k]) {
      missing.push_back(k);
    } else {
      labels[k] = *assigned[k];
    }
  }
  if (!missing.empty()) throw SpanError("context indices not covered by any source span: " + join(missing));
  return labels;
}

SourceShares map_sources(const HeadAttribution& heads, std::span<const std::span<const double>> attn_rows,
                         const SourceSpans& spans) {
  if (attn_rows.size() != heads.n_heads()) {
    throw DataError("map_sources got " + std::to_string(attn_rows.size()) + " attention rows for " +
                    std::to_string(heads.n_heads()) + " heads");
  }
  if (attn_rows.empty() || attn_rows.front().empty()) throw SpanError("empty attention row");
  const std::size_t row_length = attn_rows.front().size();
  const std::vector<Source> labels = spans.labels(row_length);

  SourceShares shares{};
  for (std::size_t h = 0; h < attn_rows.size(); ++h) {
    const auto row = attn_rows[h];
    if (row.size() != row_length) throw DataError("attention rows differ in length across heads");
    std::array<double, kInputSourceCount> mass{};
    double total = 0.0;
    for (std::size_t k = 0; k < row_length; ++k) {
      mass[index(labels[k])] += row[k];
      total += row[k];
    }
    if (!(total > 0.0)) throw DataError("attention row of head " + std::to_string(h) + " carries no mass");
    for (std::size_t s = 0; s < kInputSourceCount; ++s) shares[s] += heads.prob_share[h] * (mass[s] / total);
  }
  return shares;
}

}  // namespace tokattr::attribution
