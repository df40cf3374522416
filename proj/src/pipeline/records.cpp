#include "tokattr/pipeline/records.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "tokattr/error.hpp"
#include "tokattr/model/tokenizer.hpp"

namespace tokattr::pipeline {

namespace {

using Json = nlohmann::ordered_json;

Json parse_line(const std::string& line, std::size_t line_no) {
  try {
    return Json::parse(line);
  } catch (const Json::parse_error& e) {
    throw DataError("records line " + std::to_string(line_no) + ": " + e.what());
  }
}

std::vector<int> ids_field(const Json& j, const char* key, bool required) {
  if (!j.contains(key)) {
    if (required) throw DataError(std::string("missing field '") + key + "'");
    return {};
  }
  return j.at(key).get<std::vector<int>>();
}

std::optional<int> label_field(const Json& j) {
  if (!j.contains("label") || j.at("label").is_null()) return std::nullopt;
  return j.at("label").get<int>();
}

}  // namespace

std::string_view to_string(TemplateRoute route) { return route == TemplateRoute::query ? "query" : "rag"; }

TemplateRoute parse_template_route(std::string_view text) {
  if (text == "query") return TemplateRoute::query;
  if (text == "rag") return TemplateRoute::rag;
  throw ConfigError("template route must be 'query' or 'rag', got '" + std::string(text) + "'");
}

void validate_record(const AnalysisRecord& r, int vocab_size, int max_positions) {
  const std::string where = "record '" + r.id + "': ";
  if (r.response_ids.empty()) throw DataError(where + "response is empty");
  if (r.context_length() == 0) throw DataError(where + "context is empty, nothing predicts the first response token");
  const std::size_t total = r.context_length() + r.response_ids.size();
  if (total > static_cast<std::size_t>(max_positions)) {
    throw DataError(where + "sequence of " + std::to_string(total) + " tokens exceeds max_positions " +
                    std::to_string(max_positions));
  }
  auto check_ids = [&](const std::vector<int>& ids, const char* field) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (ids[i] < 0 || ids[i] >= vocab_size) {
        throw DataError(where + field + "[" + std::to_string(i) + "] = " + std::to_string(ids[i]) +
                        " outside vocabulary of " + std::to_string(vocab_size));
      }
    }
  };
  check_ids(r.template_ids, "template_ids");
  check_ids(r.query_ids, "query_ids");
  check_ids(r.rag_ids, "rag_ids");
  check_ids(r.response_ids, "response_ids");
  if (r.query_positions.has_value() != r.rag_positions.has_value()) {
    throw SpanError(where + "query_positions and rag_positions must be given together");
  }
  for (const auto* positions : {&r.query_positions, &r.rag_positions}) {
    if (!*positions) continue;
    for (std::size_t k : **positions) {
      if (k >= r.context_length()) {
        throw SpanError(where + "span index " + std::to_string(k) + " lies outside the context of " +
                        std::to_string(r.context_length()) + " tokens");
      }
    }
  }
  if (r.label && *r.label != 0 && *r.label != 1) throw DataError(where + "label must be 0 or 1");
  if (!r.response_text.empty() && r.token_offsets.empty()) {
    throw DataError(where + "response_text given without token_offsets");
  }
  if (!r.token_offsets.empty()) {
    if (r.token_offsets.size() != r.response_ids.size()) {
      throw DataError(where + std::to_string(r.token_offsets.size()) + " token offsets for " +
                      std::to_string(r.response_ids.size()) + " response tokens");
    }
    for (std::size_t i = 0; i < r.token_offsets.size(); ++i) {
      const auto& o = r.token_offsets[i];
      if (o.start > o.end || o.end > r.response_text.size()) {
        throw DataError(where + "token offset " + std::to_string(i) + " [" + std::to_string(o.start) + ", " +
                        std::to_string(o.end) + ") outside response_text of length " +
                        std::to_string(r.response_text.size()));
      }
    }
  }
}

PreparedSequence prepare(const AnalysisRecord& r, TemplateRoute default_route) {
  PreparedSequence out;
  const TemplateRoute route = r.template_route.value_or(default_route);
  auto append = [&](const std::vector<int>& ids, std::vector<std::size_t>* span) {
    for (int id : ids) {
      if (span) span->push_back(out.tokens.size());
      out.tokens.push_back(id);
    }
  };
  append(r.template_ids, route == TemplateRoute::query ? &out.layout.query : &out.layout.rag);
  append(r.query_ids, &out.layout.query);
  append(r.rag_ids, &out.layout.rag);
  out.layout.response_start = out.tokens.size();
  append(r.response_ids, nullptr);
  if (r.query_positions && r.rag_positions) {
    out.layout.query = *r.query_positions;
    out.layout.rag = *r.rag_positions;
  }
  std::sort(out.layout.query.begin(), out.layout.query.end());
  std::sort(out.layout.rag.begin(), out.layout.rag.end());
  return out;
}

std::vector<AnalysisRecord> read_records(std::istream& in) {
  std::vector<AnalysisRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const Json j = parse_line(line, line_no);
    AnalysisRecord r;
    try {
      r.id = j.value("id", "record" + std::to_string(out.size()));
      r.template_ids = ids_field(j, "template_ids", false);
      if (j.contains("template_route")) r.template_route = parse_template_route(j.at("template_route").get<std::string>());
      r.query_ids = ids_field(j, "query_ids", true);
      r.rag_ids = ids_field(j, "rag_ids", true);
      r.response_ids = ids_field(j, "response_ids", true);
      if (j.contains("query_positions")) r.query_positions = j.at("query_positions").get<std::vector<std::size_t>>();
      if (j.contains("rag_positions")) r.rag_positions = j.at("rag_positions").get<std::vector<std::size_t>>();
      r.label = label_field(j);
      r.response_text = j.value("response_text", std::string{});
      if (j.contains("token_offsets")) {
        for (const auto& o : j.at("token_offsets")) {
          const auto pair = o.get<std::vector<std::size_t>>();
          if (pair.size() != 2) throw DataError("token offsets must be [start, end] pairs");
          r.token_offsets.push_back({pair[0], pair[1]});
        }
      }
    } catch (const Json::exception& e) {
      throw DataError("records line " + std::to_string(line_no) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("records line " + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(std::move(r));
  }
  return out;
}

void write_record(std::ostream& out, const AnalysisRecord& r) {
  Json j;
  j["id"] = r.id;
  if (!r.template_ids.empty()) j["template_ids"] = r.template_ids;
  if (r.template_route) j["template_route"] = to_string(*r.template_route);
  j["query_ids"] = r.query_ids;
  j["rag_ids"] = r.rag_ids;
  j["response_ids"] = r.response_ids;
  if (r.query_positions) j["query_positions"] = *r.query_positions;
  if (r.rag_positions) j["rag_positions"] = *r.rag_positions;
  if (r.label) j["label"] = *r.label;
  if (!r.response_text.empty()) {
    j["response_text"] = r.response_text;
    Json offsets = Json::array();
    for (const auto& o : r.token_offsets) offsets.push_back({o.start, o.end});
    j["token_offsets"] = std::move(offsets);
  }
  out << j.dump() << '\n';
}

std::vector<AnalysisRecord> read_text_records(std::istream& in, const std::vector<std::string>& vocab) {
  const model::WhitespaceTokenizer tokenizer(vocab);
  std::vector<AnalysisRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const Json j = parse_line(line, line_no);
    AnalysisRecord r;
    try {
      r.id = j.value("id", "record" + std::to_string(out.size()));
      r.query_ids = tokenizer.encode(j.value("query", std::string{})).ids;
      r.rag_ids = tokenizer.encode(j.value("rag", std::string{})).ids;
      auto response = tokenizer.encode(j.at("response").get<std::string>());
      r.response_ids = std::move(response.ids);
      r.response_text = std::move(response.text);
      r.token_offsets = std::move(response.offsets);
      r.label = label_field(j);
    } catch (const Json::exception& e) {
      throw DataError("records line " + std::to_string(line_no) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("records line " + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace tokattr::pipeline
