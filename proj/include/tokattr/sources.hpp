#pragma once

#include <array>
#include <cstddef>
#include <string_view>

namespace tokattr {

// Canonical order of the seven attribution sources. The first four are the
// context sources an attention head can read from.
enum class Source : std::size_t { query = 0, rag, past, self, ffn, ln, initial };

inline constexpr std::size_t kSourceCount = 7;
inline constexpr std::size_t kInputSourceCount = 4;

inline constexpr std::array<std::string_view, kSourceCount> kSourceNames = {
    "Query", "RAG", "Past", "Self", "FFN", "LN", "Initial"};

// Upper-case prefixes used in feature column names (e.g. RAG_NOUN).
inline constexpr std::array<std::string_view, kSourceCount> kSourceColumnPrefixes = {
    "QUERY", "RAG", "PAST", "SELF", "FFN", "LN", "INITIAL"};

constexpr std::size_t index(Source s) { return static_cast<std::size_t>(s); }

// Signed probability contribution of each source to one generated token.
struct AttributionVector {
  std::array<double, kSourceCount> values{};

  double& operator[](Source s) { return values[index(s)]; }
  double operator[](Source s) const { return values[index(s)]; }

  // Fixed left-to-right summation order.
  double sum() const {
    double total = 0.0;
    for (double v : values) total += v;
    return total;
  }
};

}  // namespace tokattr
