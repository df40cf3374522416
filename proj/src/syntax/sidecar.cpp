#include "tokattr/syntax/sidecar.hpp"

#include <istream>
#include <ostream>

#include <json.hpp>

#include "tokattr/error.hpp"

namespace tokattr::syntax {

using nlohmann::json;

WordsById read_pos_sidecar(std::istream& in) {
  WordsById out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      TaggedWord w;
      w.text = j.at("text").get<std::string>();
      w.span = {j.at("char_start").get<std::size_t>(), j.at("char_end").get<std::size_t>()};
      w.tag = parse_tag(j.at("tag").get<std::string>());
      out[j.value("id", std::string())].push_back(std::move(w));
    } catch (const json::exception& e) {
      throw DataError("POS sidecar line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_pos_sidecar(std::ostream& out, const std::string& id, const std::vector<TaggedWord>& words) {
  for (const auto& w : words) {
    json j{{"id", id},
           {"text", w.text},
           {"char_start", w.span.start},
           {"char_end", w.span.end},
           {"tag", std::string(to_string(w.tag))}};
    out << j.dump() << '\n';
  }
}

}  // namespace tokattr::syntax
