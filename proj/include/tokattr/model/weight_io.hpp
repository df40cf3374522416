#pragma once

#include <filesystem>

#include "tokattr/model/bundle.hpp"

namespace tokattr::model {

enum class StorageType { f32, f64 };

// Canonical on-disk layout (see docs/weight-format.md):
//   config.json    all ModelConfig fields
//   manifest.json  tensor name, shape, dtype, byte offset, byte length
//   weights.bin    little-endian, row-major tensors back to back
//   vocab.txt      vocab_size newline-terminated UTF-8 strings
inline constexpr const char* kConfigFile = "config.json";
inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kBlobFile = "weights.bin";
inline constexpr const char* kVocabFile = "vocab.txt";

void save_model(const ModelBundle& bundle, const std::filesystem::path& dir,
                StorageType storage = StorageType::f32);

ModelBundle load_model(const std::filesystem::path& dir);

}  // namespace tokattr::model
