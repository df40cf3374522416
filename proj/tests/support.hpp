#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "tokattr/model/config.hpp"

namespace tokattr::testing {

inline model::ModelConfig toy_config(int layers, int heads, int dim, int vocab, int max_positions = 32) {
  model::ModelConfig c;
  c.n_layers = layers;
  c.n_heads = heads;
  c.d_model = dim;
  c.vocab_size = vocab;
  c.max_positions = max_positions;
  return c;
}

inline std::vector<int> random_tokens(std::size_t n, int vocab, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> d(0, vocab - 1);
  std::vector<int> out(n);
  for (int& t : out) t = d(rng);
  return out;
}

// Fresh directory under the system temp dir, named after the running test.
inline std::filesystem::path scratch_dir(const std::string& suffix = "") {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  auto dir = std::filesystem::temp_directory_path() /
             ("tokattr_" + std::string(info->test_suite_name()) + "_" + info->name() + suffix);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace tokattr::testing
