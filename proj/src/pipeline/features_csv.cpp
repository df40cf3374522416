#include "tokattr/pipeline/features_csv.hpp"

#include <charconv>
#include <istream>
#include <ostream>

#include "tokattr/error.hpp"

namespace tokattr::pipeline {

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::vector<std::string> split_csv(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  if (quoted) throw DataError("features line " + std::to_string(line_no) + ": unterminated quote");
  return fields;
}

double parse_double(const std::string& s, std::size_t line_no, std::size_t column) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError("features line " + std::to_string(line_no) + ", column " + std::to_string(column + 1) +
                    ": '" + s + "' is not a number");
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

ResponseFeatures extract_features(const AttributedResponse& response, std::span<const syntax::TaggedWord> words) {
  const auto offsets = response.offsets();
  const auto map = syntax::align(offsets, words, response.response_text.size());
  ResponseFeatures out;
  out.id = response.id;
  out.token_tags = syntax::propagate_tags(map, words, offsets.size());
  out.unaligned = map.unaligned.size();
  const auto vectors = response.vectors();
  out.features = syntax::aggregate(vectors, out.token_tags);
  out.features.label = response.label;
  return out;
}

void write_features_csv(std::ostream& out, std::span<const ResponseFeatures> rows) {
  out << "id,label";
  for (const auto& name : syntax::feature_names()) out << ',' << name;
  out << '\n';
  for (const auto& r : rows) {
    out << csv_field(r.id) << ',';
    if (r.features.label) out << *r.features.label;
    for (double v : r.features.values) out << ',' << format_double(v);
    out << '\n';
  }
}

detector::Dataset read_features_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("features file is empty");
  const auto header = split_csv(line, 1);
  if (header.size() < 3 || header[0] != "id" || header[1] != "label") {
    throw DataError("features header must start with id,label and name at least one feature");
  }
  detector::Dataset data;
  data.feature_names.assign(header.begin() + 2, header.end());
  data.n_features = data.feature_names.size();
  std::vector<double> row(data.n_features);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_csv(line, line_no);
    if (fields.size() != header.size()) {
      throw DataError("features line " + std::to_string(line_no) + ": " + std::to_string(fields.size()) +
                      " columns, header has " + std::to_string(header.size()));
    }
    if (fields[1] != "0" && fields[1] != "1") {
      throw DataError("features line " + std::to_string(line_no) + ": label must be 0 or 1, got '" + fields[1] + "'");
    }
    for (std::size_t c = 0; c < data.n_features; ++c) row[c] = parse_double(fields[c + 2], line_no, c + 2);
    data.add(row, fields[1] == "1" ? 1 : 0, fields[0]);
  }
  data.validate();
  return data;
}

}  // namespace tokattr::pipeline
