#include "tokattr/model/toy.hpp"

#include <cmath>
#include <random>

#include "tokattr/error.hpp"

namespace tokattr::model {

ModelBundle make_toy_model(const ModelConfig& config, std::uint64_t seed,
                           const std::vector<std::string>& words) {
  config.validate();
  if (words.size() > static_cast<std::size_t>(config.vocab_size)) {
    throw ConfigError("word list has " + std::to_string(words.size()) + " entries but vocab_size is " +
                      std::to_string(config.vocab_size));
  }

  ModelWeights weights = allocate_weights(config);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(config.d_model)));

  for (auto& slot : tensor_slots(weights, config)) {
    const std::string& name = slot.spec.name;
    const bool is_norm = name.find("norm.") != std::string::npos;
    for (double& x : slot.data) {
      if (is_norm) {
        x = name.ends_with(".weight") ? 1.0 : 0.0;
      } else {
        x = static_cast<double>(static_cast<float>(normal(rng)));
      }
    }
  }

  std::vector<std::string> vocab(static_cast<std::size_t>(config.vocab_size));
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    vocab[i] = i < words.size() ? words[i] : "tok" + std::to_string(i);
  }
  return ModelBundle(config, std::move(weights), std::move(vocab));
}

ModelBundle generate_toy_model(const ModelConfig& config, std::uint64_t seed,
                               const std::filesystem::path& out_dir,
                               const std::vector<std::string>& words, StorageType storage) {
  ModelBundle bundle = make_toy_model(config, seed, words);
  save_model(bundle, out_dir, storage);
  return bundle;
}

}  // namespace tokattr::model
