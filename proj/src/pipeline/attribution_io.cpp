#include "tokattr/pipeline/attribution_io.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "tokattr/error.hpp"

namespace tokattr::pipeline {

namespace {
using Json = nlohmann::ordered_json;
}  // namespace

std::vector<AttributionVector> AttributedResponse::vectors() const {
  std::vector<AttributionVector> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.vector);
  return out;
}

std::vector<CharSpan> AttributedResponse::offsets() const {
  std::vector<CharSpan> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.offset);
  return out;
}

double AttributedResponse::max_residual() const {
  double worst = 0.0;
  for (const auto& t : tokens) worst = std::max(worst, t.residual);
  return worst;
}

void write_attributions(std::ostream& out, const AttributedResponse& r) {
  Json head;
  head["kind"] = "record";
  head["id"] = r.id;
  head["label"] = r.label ? Json(*r.label) : Json(nullptr);
  head["response_text"] = r.response_text;
  head["n_tokens"] = r.tokens.size();
  out << head.dump() << '\n';
  for (const auto& t : r.tokens) {
    Json j;
    j["kind"] = "token";
    j["id"] = r.id;
    j["index"] = t.index;
    j["position"] = t.position;
    j["target"] = t.target;
    j["offset"] = {t.offset.start, t.offset.end};
    Json v = Json::object();
    for (std::size_t s = 0; s < kSourceCount; ++s) v[std::string(kSourceNames[s])] = t.vector.values[s];
    j["sources"] = std::move(v);
    j["p_final"] = t.p_final;
    j["residual"] = t.residual;
    out << j.dump() << '\n';
  }
}

std::vector<AttributedResponse> read_attributions(std::istream& in) {
  std::vector<AttributedResponse> out;
  std::size_t expected = 0;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) { return DataError("attributions line " + std::to_string(line_no) + ": " + msg); };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const Json j = Json::parse(line);
      const std::string kind = j.at("kind").get<std::string>();
      if (kind == "record") {
        if (!out.empty() && out.back().tokens.size() != expected) {
          throw fail("record '" + out.back().id + "' ended after " + std::to_string(out.back().tokens.size()) +
                     " of " + std::to_string(expected) + " tokens");
        }
        AttributedResponse r;
        r.id = j.at("id").get<std::string>();
        if (!j.at("label").is_null()) r.label = j.at("label").get<int>();
        r.response_text = j.at("response_text").get<std::string>();
        expected = j.at("n_tokens").get<std::size_t>();
        out.push_back(std::move(r));
      } else if (kind == "token") {
        if (out.empty()) throw fail("token line before any record line");
        AttributedResponse& r = out.back();
        if (j.at("id").get<std::string>() != r.id) throw fail("token belongs to '" + j.at("id").get<std::string>() + "', not '" + r.id + "'");
        AttributedToken t;
        t.index = j.at("index").get<std::size_t>();
        if (t.index != r.tokens.size()) throw fail("token index " + std::to_string(t.index) + " out of order");
        t.position = j.at("position").get<int>();
        t.target = j.at("target").get<int>();
        const auto off = j.at("offset").get<std::vector<std::size_t>>();
        if (off.size() != 2) throw fail("offset must be [start, end]");
        t.offset = {off[0], off[1]};
        const auto& src = j.at("sources");
        for (std::size_t s = 0; s < kSourceCount; ++s) t.vector.values[s] = src.at(std::string(kSourceNames[s])).get<double>();
        t.p_final = j.at("p_final").get<double>();
        t.residual = j.at("residual").get<double>();
        r.tokens.push_back(t);
      } else {
        throw fail("unknown kind '" + kind + "'");
      }
    } catch (const Json::exception& e) {
      throw fail(e.what());
    }
  }
  if (!out.empty() && out.back().tokens.size() != expected) {
    throw DataError("attributions: record '" + out.back().id + "' is truncated");
  }
  return out;
}

}  // namespace tokattr::pipeline
