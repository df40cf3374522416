#include "tokattr/model/weight_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "tokattr/error.hpp"

namespace tokattr::model {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kFormatTag = "tokattr-model";
constexpr int kFormatVersion = 1;

std::size_t dtype_size(StorageType t) { return t == StorageType::f32 ? 4 : 8; }

std::string dtype_name(StorageType t) { return t == StorageType::f32 ? "f32" : "f64"; }

StorageType parse_dtype(const std::string& name, const std::string& tensor) {
  if (name == "f32") return StorageType::f32;
  if (name == "f64") return StorageType::f64;
  throw ModelFormatError("tensor '" + tensor + "': unsupported dtype '" + name + "'");
}

template <typename U>
void put_le(std::string& out, U bits) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
  }
}

template <typename U>
U get_le(const unsigned char* p) {
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) bits |= static_cast<U>(p[i]) << (8 * i);
  return bits;
}

json config_to_json(const ModelConfig& c) {
  return json{{"format", kFormatTag},
              {"version", kFormatVersion},
              {"n_layers", c.n_layers},
              {"n_heads", c.n_heads},
              {"d_model", c.d_model},
              {"vocab_size", c.vocab_size},
              {"max_positions", c.max_positions},
              {"norm_kind", std::string(to_string(c.norm_kind))},
              {"position_kind", std::string(to_string(c.position_kind))},
              {"ffn_kind", std::string(to_string(c.ffn_kind))},
              {"d_ff", c.d_ff},
              {"ffn_bias", c.ffn_bias},
              {"tied_unembedding", c.tied_unembedding},
              {"norm_eps", c.norm_eps},
              {"rope_theta", c.rope_theta}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  try {
    if (j.value("format", std::string(kFormatTag)) != kFormatTag) {
      throw ModelFormatError("config.json: unexpected format tag");
    }
    c.n_layers = j.at("n_layers").get<int>();
    c.n_heads = j.at("n_heads").get<int>();
    c.d_model = j.at("d_model").get<int>();
    c.vocab_size = j.at("vocab_size").get<int>();
    c.max_positions = j.at("max_positions").get<int>();
    c.norm_kind = parse_norm_kind(j.value("norm_kind", "layernorm"));
    c.position_kind = parse_position_kind(j.value("position_kind", "learned_absolute"));
    c.ffn_kind = parse_ffn_kind(j.value("ffn_kind", "gelu"));
    c.d_ff = j.value("d_ff", 0);
    c.ffn_bias = j.value("ffn_bias", true);
    c.tied_unembedding = j.value("tied_unembedding", true);
    c.norm_eps = j.value("norm_eps", 1e-5);
    c.rope_theta = j.value("rope_theta", 10000.0);
  } catch (const json::exception& e) {
    throw ModelFormatError(std::string("config.json: ") + e.what());
  }
  c.validate();
  return c;
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ModelFormatError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ModelFormatError(path.filename().string() + ": " + e.what());
  }
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace

void save_model(const ModelBundle& bundle, const fs::path& dir, StorageType storage) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
  }

  const auto& config = bundle.config();
  std::string blob;
  json tensors = json::array();
  for (const auto& slot : tensor_slots(bundle.weights(), config)) {
    const std::size_t offset = blob.size();
    for (double x : slot.data) {
      if (storage == StorageType::f32) {
        put_le(blob, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
      } else {
        put_le(blob, std::bit_cast<std::uint64_t>(x));
      }
    }
    tensors.push_back({{"name", slot.spec.name},
                       {"shape", slot.spec.shape},
                       {"dtype", dtype_name(storage)},
                       {"offset", offset},
                       {"nbytes", blob.size() - offset}});
  }
  json manifest{{"blob", kBlobFile}, {"byte_order", "little"}, {"tensors", tensors}};

  std::string vocab;
  for (const auto& s : bundle.vocab()) {
    if (s.find('\n') != std::string::npos) {
      throw ModelFormatError("vocabulary entry contains a newline: '" + s + "'");
    }
    vocab += s;
    vocab += '\n';
  }

  write_text_file(dir / kConfigFile, config_to_json(config).dump(2) + "\n");
  write_text_file(dir / kManifestFile, manifest.dump(2) + "\n");
  write_text_file(dir / kBlobFile, blob);
  write_text_file(dir / kVocabFile, vocab);
}

ModelBundle load_model(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ModelFormatError("model directory not found: " + dir.string());
  const ModelConfig config = config_from_json(read_json_file(dir / kConfigFile));
  const json manifest = read_json_file(dir / kManifestFile);

  struct Entry {
    std::vector<std::int64_t> shape;
    StorageType dtype;
    std::uint64_t offset;
    std::uint64_t nbytes;
  };
  std::map<std::string, Entry> entries;
  try {
    for (const auto& t : manifest.at("tensors")) {
      const auto name = t.at("name").get<std::string>();
      Entry e{t.at("shape").get<std::vector<std::int64_t>>(),
              parse_dtype(t.at("dtype").get<std::string>(), name), t.at("offset").get<std::uint64_t>(),
              t.at("nbytes").get<std::uint64_t>()};
      if (!entries.emplace(name, std::move(e)).second) {
        throw ModelFormatError("manifest lists tensor '" + name + "' twice");
      }
    }
  } catch (const json::exception& e) {
    throw ModelFormatError(std::string("manifest.json: ") + e.what());
  }

  const fs::path blob_path = dir / manifest.value("blob", std::string(kBlobFile));
  std::ifstream blob_in(blob_path, std::ios::binary);
  if (!blob_in) throw ModelFormatError("cannot open " + blob_path.string());
  const std::string blob((std::istreambuf_iterator<char>(blob_in)), std::istreambuf_iterator<char>());

  ModelWeights weights = allocate_weights(config);
  std::size_t consumed = 0;
  for (auto& slot : tensor_slots(weights, config)) {
    auto it = entries.find(slot.spec.name);
    if (it == entries.end()) throw ModelFormatError("missing tensor '" + slot.spec.name + "'");
    const Entry& e = it->second;
    if (e.shape != slot.spec.shape) {
      std::ostringstream msg;
      msg << "tensor '" << slot.spec.name << "': expected shape [";
      for (std::size_t i = 0; i < slot.spec.shape.size(); ++i) msg << (i ? ", " : "") << slot.spec.shape[i];
      msg << "], found [";
      for (std::size_t i = 0; i < e.shape.size(); ++i) msg << (i ? ", " : "") << e.shape[i];
      msg << ']';
      throw ShapeMismatchError(msg.str());
    }
    const std::size_t width = dtype_size(e.dtype);
    if (e.nbytes != slot.data.size() * width) {
      throw ModelFormatError("tensor '" + slot.spec.name + "': byte length does not match shape");
    }
    if (e.offset > blob.size() || e.nbytes > blob.size() - e.offset) {
      throw ModelFormatError("tensor '" + slot.spec.name + "': extends past end of " + kBlobFile);
    }
    const auto* p = reinterpret_cast<const unsigned char*>(blob.data()) + e.offset;
    for (std::size_t i = 0; i < slot.data.size(); ++i, p += width) {
      slot.data[i] = e.dtype == StorageType::f32
                         ? static_cast<double>(std::bit_cast<float>(get_le<std::uint32_t>(p)))
                         : std::bit_cast<double>(get_le<std::uint64_t>(p));
    }
    ++consumed;
  }
  if (consumed != entries.size()) {
    for (const auto& [name, _] : entries) {
      bool known = false;
      for (const auto& spec : canonical_tensors(config)) known = known || spec.name == name;
      if (!known) throw ModelFormatError("manifest lists unexpected tensor '" + name + "'");
    }
  }

  std::ifstream vocab_in(dir / kVocabFile, std::ios::binary);
  if (!vocab_in) throw ModelFormatError("cannot open " + (dir / kVocabFile).string());
  std::vector<std::string> vocab;
  for (std::string line; std::getline(vocab_in, line);) vocab.push_back(line);

  return ModelBundle(config, std::move(weights), std::move(vocab));
}

}  // namespace tokattr::model
