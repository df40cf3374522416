#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "tokattr/syntax/alignment.hpp"

namespace tokattr::syntax {

// POS sidecar: one JSON object per line,
//   {"id": "<record id>", "text": "...", "char_start": 0, "char_end": 4, "tag": "NOUN"}
// `id` groups words by response and may be omitted for single-response files
// (grouped under ""). Unknown tags read as X. Words keep file order.
using WordsById = std::map<std::string, std::vector<TaggedWord>>;

WordsById read_pos_sidecar(std::istream& in);
void write_pos_sidecar(std::ostream& out, const std::string& id, const std::vector<TaggedWord>& words);

}  // namespace tokattr::syntax
