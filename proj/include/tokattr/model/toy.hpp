#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tokattr/model/bundle.hpp"
#include "tokattr/model/weight_io.hpp"

namespace tokattr::model {

// Seeded random model. Every projection, embedding and FFN bias entry is
// drawn from N(0, 1/d) and rounded to f32, so a bundle saved as f32 reloads
// bit-identically. Norm gains are 1 and norm biases 0.
//
// Vocabulary: entry i is "tok<i>" unless `words` supplies a string for it
// (words fill the first entries in order).
ModelBundle make_toy_model(const ModelConfig& config, std::uint64_t seed,
                           const std::vector<std::string>& words = {});

ModelBundle generate_toy_model(const ModelConfig& config, std::uint64_t seed,
                               const std::filesystem::path& out_dir,
                               const std::vector<std::string>& words = {},
                               StorageType storage = StorageType::f32);

}  // namespace tokattr::model
