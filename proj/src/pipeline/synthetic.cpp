#include "tokattr/pipeline/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_map>

#include "tokattr/error.hpp"

namespace tokattr::pipeline {

namespace {

const std::vector<std::string>& determiners() {
  static const std::vector<std::string> w = {"the", "a", "this", "every"};
  return w;
}
const std::vector<std::string>& adpositions() {
  static const std::vector<std::string> w = {"of", "in", "for", "with"};
  return w;
}
const std::vector<std::string>& auxiliaries() {
  static const std::vector<std::string> w = {"is", "was", "has"};
  return w;
}
const std::vector<std::string>& nouns() {
  static const std::vector<std::string> w = {"river",  "city",   "bridge", "museum", "tower", "school",
                                             "market", "harbor", "garden", "valley", "church", "station",
                                             "island", "castle", "forest", "library"};
  return w;
}
const std::vector<std::string>& numerals() {
  static const std::vector<std::string> w = {"3", "12", "40", "75", "118", "260", "1850", "1923", "2004", "9.5"};
  return w;
}
const std::vector<std::string>& punctuation() {
  static const std::vector<std::string> w = {".", "?"};
  return w;
}

template <typename Rng>
const std::string& pick(const std::vector<std::string>& from, Rng& rng) {
  std::uniform_int_distribution<std::size_t> d(0, from.size() - 1);
  return from[d(rng)];
}

double stddev(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size()));
}

}  // namespace

std::vector<std::string> synthetic_vocabulary() {
  std::vector<std::string> v;
  for (const auto* group : {&determiners(), &adpositions(), &auxiliaries(), &nouns(), &numerals(), &punctuation()}) {
    v.insert(v.end(), group->begin(), group->end());
  }
  return v;
}

model::ModelConfig synthetic_model_config() {
  model::ModelConfig c;
  c.n_layers = 2;
  c.n_heads = 2;
  c.d_model = 32;
  c.vocab_size = 64;
  c.max_positions = 64;
  return c;
}

std::vector<AnalysisRecord> synthetic_records(const std::vector<std::string>& vocab, std::size_t n,
                                              std::uint64_t seed, double positive_fraction) {
  if (!(positive_fraction >= 0.0 && positive_fraction <= 1.0)) throw ConfigError("positive fraction must lie in [0, 1]");
  const auto words = synthetic_vocabulary();
  if (vocab.size() < words.size() || !std::equal(words.begin(), words.end(), vocab.begin())) {
    throw ConfigError("vocabulary does not start with the synthetic word list");
  }
  std::unordered_map<std::string, int> id;
  for (std::size_t i = 0; i < words.size(); ++i) id.emplace(words[i], static_cast<int>(i));

  std::mt19937_64 rng(seed);
  const auto n_pos = static_cast<std::size_t>(std::lround(positive_fraction * static_cast<double>(n)));
  std::vector<int> labels(n, 0);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n_pos), 1);
  std::shuffle(labels.begin(), labels.end(), rng);

  std::vector<AnalysisRecord> out;
  out.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    AnalysisRecord rec;
    char name[32];
    std::snprintf(name, sizeof name, "syn%04zu", r);
    rec.id = name;
    rec.label = labels[r];
    const std::string subject = pick(nouns(), rng);
    const std::string place = pick(nouns(), rng);
    const std::string number = pick(numerals(), rng);
    auto ids = [&](std::initializer_list<std::string> ws) {
      std::vector<int> v;
      for (const auto& w : ws) v.push_back(id.at(w));
      return v;
    };
    rec.query_ids = ids({pick(determiners(), rng), subject, pick(adpositions(), rng), "the", place, "?"});
    rec.rag_ids = ids({"the", subject, pick(adpositions(), rng), place, pick(auxiliaries(), rng), number, "."});
    const auto filler = ids({pick(determiners(), rng), pick(nouns(), rng), pick(auxiliaries(), rng),
                             pick(numerals(), rng), "."});
    rec.rag_ids.insert(rec.rag_ids.end(), filler.begin(), filler.end());

    const std::vector<std::string> response = {pick(determiners(), rng), subject, pick(auxiliaries(), rng),
                                               number, pick(adpositions(), rng), "the", place, "."};
    for (const auto& w : response) {
      // punctuation attaches to the preceding word
      if (!rec.response_text.empty() && w != "." && w != "?") rec.response_text += ' ';
      const std::size_t start = rec.response_text.size();
      rec.response_text += w;
      rec.response_ids.push_back(id.at(w));
      rec.token_offsets.push_back({start, rec.response_text.size()});
    }
    out.push_back(std::move(rec));
  }
  return out;
}

void plant_signal(std::vector<AttributedResponse>& responses, std::span<const std::vector<syntax::UposTag>> tags,
                  double strength) {
  if (tags.size() != responses.size()) throw DataError("one tag list per response is required");
  std::vector<double> rag_on_nouns, ln_on_numerals;
  for (std::size_t r = 0; r < responses.size(); ++r) {
    if (tags[r].size() != responses[r].tokens.size()) {
      throw DataError("response '" + responses[r].id + "': tag count does not match token count");
    }
    for (std::size_t t = 0; t < tags[r].size(); ++t) {
      const auto& v = responses[r].tokens[t].vector;
      if (tags[r][t] == syntax::UposTag::NOUN) rag_on_nouns.push_back(v[Source::rag]);
      if (tags[r][t] == syntax::UposTag::NUM) ln_on_numerals.push_back(v[Source::ln]);
    }
  }
  const double rag_shift = strength * stddev(rag_on_nouns);
  const double ln_shift = strength * stddev(ln_on_numerals);

  for (std::size_t r = 0; r < responses.size(); ++r) {
    if (responses[r].label != 1) continue;
    for (std::size_t t = 0; t < tags[r].size(); ++t) {
      AttributedToken& token = responses[r].tokens[t];
      auto& v = token.vector;
      if (tags[r][t] == syntax::UposTag::NOUN) {
        v[Source::rag] -= rag_shift;
        v[Source::ffn] += rag_shift;
      } else if (tags[r][t] == syntax::UposTag::NUM) {
        v[Source::ln] += ln_shift;
        v[Source::ffn] -= ln_shift;
      }
      token.residual = std::abs(v.sum() - token.p_final);
    }
  }
}

}  // namespace tokattr::pipeline
