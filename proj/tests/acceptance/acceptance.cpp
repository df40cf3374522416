// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tokattr/attribution/attribute.hpp"
#include "tokattr/attribution/taylor.hpp"
#include "tokattr/detector/metrics.hpp"
#include "tokattr/detector/protocols.hpp"
#include "tokattr/error.hpp"
#include "tokattr/model/forward.hpp"
#include "tokattr/model/toy.hpp"
#include "tokattr/pipeline/analyze.hpp"
#include "tokattr/pipeline/features_csv.hpp"
#include "tokattr/pipeline/synthetic.hpp"
#include "tokattr/syntax/aggregate.hpp"
#include "tokattr/syntax/alignment.hpp"
#include "tokattr/syntax/fallback_tagger.hpp"

using namespace tokattr;
using Clock = std::chrono::steady_clock;

namespace {

// Pinned tolerances.
constexpr double kSumTol = 1e-9;
constexpr double kConservationTol = 1e-12;
constexpr double kSlopeTarget = 2.0;
constexpr double kSlopeTol = 0.3;
constexpr double kSlopePassFraction = 0.90;
constexpr double kFdRelTol = 1e-4;
constexpr double kHeadSumTol = 1e-9;
constexpr double kMassTol = 1e-6;
constexpr double kAucTol = 1e-12;
constexpr double kMinF1 = 0.90;
constexpr double kMinAuc = 0.95;
constexpr double kShuffledLo = 0.4;
constexpr double kShuffledHi = 0.6;
constexpr double kSweepSeconds = 60.0;
constexpr double kDetectorSeconds = 300.0;

constexpr int kSweepModels = 50;
constexpr int kSweepTokens = 20;
constexpr std::size_t kCorpusSize = 300;
constexpr double kPlantStrength = 2.0;
constexpr int kShuffledSeeds = 20;

int failures = 0;

void verdict(int criterion, bool pass, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  return num / den;
}

// d softmax(z)_y / d z_y by central differences, in extended precision.
double fd_gradient_factor(const RowVector& h, const Matrix& u, int y) {
  std::vector<long double> z(static_cast<std::size_t>(u.rows()));
  for (Eigen::Index v = 0; v < u.rows(); ++v) {
    long double acc = 0;
    for (Eigen::Index k = 0; k < u.cols(); ++k) acc += static_cast<long double>(h(k)) * u(v, k);
    z[static_cast<std::size_t>(v)] = acc;
  }
  auto p_at = [&](long double shift) {
    auto w = z;
    w[static_cast<std::size_t>(y)] += shift;
    const long double mx = *std::max_element(w.begin(), w.end());
    long double den = 0;
    for (auto v : w) den += std::exp(v - mx);
    return std::exp(w[static_cast<std::size_t>(y)] - mx) / den;
  };
  const long double step = 1e-6L;
  return static_cast<double>((p_at(step) - p_at(-step)) / (2 * step));
}

double brute_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1.0;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

// Criteria 1-4 share one sweep over seeded toy models.
void run_sweep() {
  const std::array<int, 4> layers = {1, 2, 4, 8};
  const std::array<int, 3> heads = {1, 2, 4};
  const std::array<int, 2> dims = {16, 64};
  const std::array<int, 2> vocabs = {50, 500};

  double max_residual = 0.0, max_head_share = 0.0, max_source_share = 0.0, max_head_sum = 0.0;
  double max_fd_rel = 0.0, worst_slope_dev = 0.0;
  std::size_t tokens_checked = 0, pairs = 0, slope_ok = 0;
  double sweep_time = 0.0;

  for (int i = 0; i < kSweepModels; ++i) {
    model::ModelConfig c;
    c.n_layers = layers[static_cast<std::size_t>(i % 4)];
    c.n_heads = heads[static_cast<std::size_t>((i / 4) % 3)];
    c.d_model = dims[static_cast<std::size_t>((i / 12) % 2)];
    c.vocab_size = vocabs[static_cast<std::size_t>((i / 24) % 2)];
    c.max_positions = kSweepTokens;
    const std::uint64_t seed = 1000 + static_cast<std::uint64_t>(i);

    const auto t0 = Clock::now();
    const auto m = model::make_toy_model(c, seed);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> tok(0, c.vocab_size - 1);
    std::vector<int> tokens(kSweepTokens);
    for (int& t : tokens) t = tok(rng);
    const auto cache = model::forward_cached(m, tokens);

    // Two layouts: a RAG-style split, and one where every row after the first
    // predicts a response token.
    std::vector<attribution::TokenAttribution> attributed;
    for (const attribution::ContextLayout& layout :
         {attribution::ContextLayout{{0, 1, 2, 3, 4}, {5, 6, 7, 8, 9}, 10}, attribution::ContextLayout{{0}, {}, 1}}) {
      auto out = attribution::attribute_response(cache, m, layout);
      attributed.insert(attributed.end(), out.begin(), out.end());
    }
    sweep_time += seconds_since(t0);

    for (const auto& t : attributed) {
      ++tokens_checked;
      max_residual = std::max(max_residual, std::abs(t.vector.sum() - t.coarse.p_final));
      for (std::size_t l = 0; l < t.layers.size(); ++l) {
        const auto& shares = t.layers[l].heads.prob_share;
        const double head_total = std::accumulate(shares.begin(), shares.end(), 0.0);
        const auto& src = t.layers[l].sources;
        const double source_total = std::accumulate(src.begin(), src.end(), 0.0);
        max_head_share = std::max(max_head_share, std::abs(head_total - t.coarse.att_delta[l]));
        max_source_share = std::max(max_source_share, std::abs(source_total - head_total));
      }
    }

    for (int l = 0; l < c.n_layers; ++l) {
      Matrix sum = Matrix::Zero(cache.h0.rows(), cache.h0.cols());
      for (const auto& h : cache.head_out[static_cast<std::size_t>(l)]) sum += h;
      max_head_sum = std::max(max_head_sum, (sum - cache.attn_residual[static_cast<std::size_t>(l)]).cwiseAbs().maxCoeff());
    }

    for (int l = 0; l < c.n_layers; ++l) {
      for (int p = 0; p + 1 < kSweepTokens; ++p) {
        const int y = tokens[static_cast<std::size_t>(p + 1)];
        std::vector<double> log_eps, log_err;
        for (int k = 2; k <= 6; ++k) {
          const double eps = std::ldexp(1.0, -k);
          const auto d = attribution::taylor_check(cache, m, l, p, y, eps);
          log_eps.push_back(std::log(eps));
          log_err.push_back(std::log(d.abs_error));
        }
        const double s = slope(log_eps, log_err);
        ++pairs;
        const double dev = std::abs(s - kSlopeTarget);
        if (dev <= kSlopeTol) ++slope_ok;
        if (std::isfinite(dev)) worst_slope_dev = std::max(worst_slope_dev, dev);

        const auto d = attribution::taylor_check(cache, m, l, p, y, 0.25);
        const double fd = fd_gradient_factor(cache.layer_input(l).row(p), m.unembedding(), y);
        max_fd_rel = std::max(max_fd_rel, std::abs(fd - d.gradient_factor) / d.gradient_factor);
      }
    }
  }

  verdict(1, max_residual <= kSumTol && sweep_time < kSweepSeconds,
          fmt("%.0f models, %.0f tokens, max |sum(7 sources) - p_final| = %.3g (tol 1e-9), time %.2f s (limit 60 s)",
              kSweepModels, static_cast<double>(tokens_checked), max_residual, sweep_time));
  verdict(2, max_head_share <= kConservationTol && max_source_share <= kConservationTol,
          fmt("max |sum_h dP[h] - att_delta| = %.3g, max |sum_S dP_S - sum_h dP[h]| = %.3g (tol 1e-12)",
              max_head_share, max_source_share));
  const double frac = static_cast<double>(slope_ok) / static_cast<double>(pairs);
  verdict(3, frac >= kSlopePassFraction && max_fd_rel <= kFdRelTol,
          fmt("slope within 2.0 +/- 0.3 on %.1f%% of %.0f pairs (need 90%%), worst deviation %.3f; "
              "max FD relative error %.3g (tol 1e-4)",
              100.0 * frac, static_cast<double>(pairs), worst_slope_dev, max_fd_rel));
  verdict(4, max_head_sum <= kHeadSumTol,
          fmt("max |concat projection - sum_h head_out| = %.3g (tol 1e-9)", max_head_sum));
}

struct Corpus {
  std::vector<pipeline::AttributedResponse> responses;  // before planting
  detector::Dataset planted;
};

Corpus build_corpus() {
  const auto m = model::make_toy_model(pipeline::synthetic_model_config(), 7, pipeline::synthetic_vocabulary());
  const auto records = pipeline::synthetic_records(m.vocab(), kCorpusSize, 11, 0.5);
  Corpus corpus;
  corpus.responses = pipeline::analyze_records(m, records);
  std::vector<std::vector<syntax::UposTag>> tags;
  std::vector<std::vector<syntax::TaggedWord>> words;
  for (const auto& r : corpus.responses) {
    words.push_back(syntax::builtin_fallback_tagger(r.response_text));
    tags.push_back(pipeline::extract_features(r, words.back()).token_tags);
  }
  auto planted = corpus.responses;
  pipeline::plant_signal(planted, tags, kPlantStrength);
  std::vector<pipeline::ResponseFeatures> rows;
  for (std::size_t i = 0; i < planted.size(); ++i) rows.push_back(pipeline::extract_features(planted[i], words[i]));
  std::stringstream csv;
  pipeline::write_features_csv(csv, rows);
  corpus.planted = pipeline::read_features_csv(csv);
  return corpus;
}

void check_aggregation(const Corpus& corpus) {
  bool dims_ok = syntax::kFeatureDim == 126 && syntax::feature_names().size() == 126 &&
                 corpus.planted.n_features == 126;
  double max_mass = 0.0;
  for (const auto& r : corpus.responses) {
    const auto words = syntax::builtin_fallback_tagger(r.response_text);
    const auto f = pipeline::extract_features(r, words);
    dims_ok = dims_ok && f.features.values.size() == 126;
    std::array<double, syntax::kTagCount> counts{};
    for (auto t : f.token_tags) counts[syntax::index(t)] += 1.0;
    double mass = 0.0, p_final = 0.0;
    for (std::size_t k = 0; k < syntax::kFeatureDim; ++k) mass += f.features[k] * counts[k / kSourceCount];
    for (const auto& t : r.tokens) p_final += t.p_final;
    max_mass = std::max(max_mass, std::abs(mass - p_final));
  }

  // "The team approved the final modification." with the noun split in two
  using syntax::UposTag;
  const std::vector<syntax::TaggedWord> words = {
      {"The", {0, 3}, UposTag::DET},           {"team", {4, 8}, UposTag::NOUN},
      {"approved", {9, 17}, UposTag::VERB},    {"the", {18, 21}, UposTag::DET},
      {"final", {22, 27}, UposTag::ADJ},       {"modification", {28, 40}, UposTag::NOUN},
      {".", {40, 41}, UposTag::PUNCT}};
  const std::vector<CharSpan> tokens = {{0, 3},   {3, 8},   {8, 17},  {17, 21},
                                        {21, 27}, {27, 32}, {32, 40}, {40, 41}};
  const auto map = syntax::align(tokens, words, 41);
  const auto tags = syntax::propagate_tags(map, words, tokens.size());
  const std::vector<UposTag> expected = {UposTag::DET, UposTag::NOUN, UposTag::VERB, UposTag::DET,
                                         UposTag::ADJ, UposTag::NOUN, UposTag::NOUN, UposTag::PUNCT};
  const bool fixture_ok = map.word_to_tokens[5] == std::vector<std::size_t>{5, 6} && map.unaligned.empty() &&
                          tags == expected;

  verdict(5, dims_ok && max_mass <= kMassTol && fixture_ok,
          std::string(dims_ok ? "features are 126-dim" : "feature dimension wrong") +
              fmt(", max mass-accounting error %.3g over %.0f responses (tol 1e-6)", max_mass,
                  static_cast<double>(corpus.responses.size())) +
              (fixture_ok ? ", sub-word fixture exact ([modi][fication] -> word 5 = {5, 6}, both NOUN)"
                          : ", sub-word fixture FAILED"));
}

void check_metrics() {
  std::mt19937_64 rng(2024);
  double max_diff = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng() % 199;
    const bool coarse = trial % 2 == 1;
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = coarse ? static_cast<double>(rng() % 8) / 8.0 : std::uniform_real_distribution<double>()(rng);
      y[i] = static_cast<int>(rng() % 2);
    }
    // both classes present
    const std::size_t a = rng() % n;
    y[a] = 0;
    y[(a + 1 + rng() % (n - 1)) % n] = 1;
    max_diff = std::max(max_diff, std::abs(detector::auc(s, y) - brute_auc(s, y)));
  }
  const double example = detector::auc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, std::vector<int>{0, 0, 1, 1});
  verdict(6, max_diff <= kAucTol && std::abs(example - 0.75) <= kAucTol,
          fmt("1000 random sets, max |AUC - pairwise| = %.3g (tol 1e-12); worked example = %.15g (expect 0.75)",
              max_diff, example));
}

detector::ProtocolOptions benchmark_options(std::uint64_t seed) {
  detector::ProtocolOptions o;
  o.grid = detector::SearchGrid::default_grid();
  o.search_iters = 6;
  o.search_folds = 3;
  o.seed = seed;
  return o;
}

void check_detector(const Corpus& corpus) {
  const auto t0 = Clock::now();
  const auto report = detector::protocol_stratified_kfold(corpus.planted, 5, benchmark_options(1));

  std::vector<double> shuffled;
  for (int s = 0; s < kShuffledSeeds; ++s) {
    detector::Dataset d = corpus.planted;
    std::mt19937_64 rng(500 + static_cast<std::uint64_t>(s));
    std::shuffle(d.y.begin(), d.y.end(), rng);
    shuffled.push_back(detector::protocol_stratified_kfold(d, 5, benchmark_options(100 + s)).auc);
  }
  const double elapsed = seconds_since(t0);
  const double mean = std::accumulate(shuffled.begin(), shuffled.end(), 0.0) / static_cast<double>(shuffled.size());
  const auto [lo, hi] = std::minmax_element(shuffled.begin(), shuffled.end());
  verdict(7,
          report.f1 >= kMinF1 && report.auc >= kMinAuc && mean >= kShuffledLo && mean <= kShuffledHi &&
              elapsed < kDetectorSeconds,
          fmt("5-fold F1 %.4f (min 0.90), AUC %.4f (min 0.95); ", report.f1, report.auc) +
              fmt("shuffled-label AUC mean %.4f over 20 seeds (range %.3f..%.3f, need mean in [0.4, 0.6]); ", mean,
                  *lo, *hi) +
              fmt("time %.1f s (limit 300 s)", elapsed));
}

// Leakage guard, checked independently of the library's own assertion.
bool isolated(const detector::FoldRecord& r) {
  const std::set<std::size_t> train(r.train.begin(), r.train.end());
  std::set<std::size_t> inner;
  for (const auto& f : r.inner_folds) inner.insert(f.begin(), f.end());
  for (std::size_t t : r.test) {
    if (train.count(t) || inner.count(t)) return false;
  }
  return std::includes(train.begin(), train.end(), inner.begin(), inner.end());
}

double neg_over_pos(const detector::Dataset& d, const std::vector<std::size_t>& idx) {
  double pos = 0, neg = 0;
  for (std::size_t i : idx) (d.y[i] == 1 ? pos : neg) += 1;
  return neg / pos;
}

void check_protocols(const Corpus& corpus) {
  detector::ProtocolOptions o;
  o.grid.n_trees = {30};
  o.grid.max_depth = {2, 3};
  o.grid.learning_rate = {0.3};
  o.search_iters = 2;
  o.search_folds = 3;
  o.seed = 3;

  std::vector<std::size_t> first200(200), first100(100);
  std::iota(first200.begin(), first200.end(), 0);
  std::iota(first100.begin(), first100.end(), 0);
  const auto d200 = corpus.planted.subset(first200);
  const auto d100 = corpus.planted.subset(first100);

  const auto kfold = detector::protocol_stratified_kfold(d200, 20, o);
  std::vector<int> seen(200, 0);
  for (std::size_t i : kfold.sample_index) ++seen[i];
  bool once = kfold.folds.size() == 20 && kfold.n_evaluated == 200;
  for (int s : seen) once = once && s == 1;
  bool kfold_isolated = true;
  for (const auto& f : kfold.folds) kfold_isolated = kfold_isolated && isolated(f);

  const auto loocv = detector::protocol_nested_loocv(d100, o);
  bool loocv_isolated = loocv.folds.size() == 100;
  bool weights_ok = true;
  std::size_t inner_checked = 0, skipped = 0;
  for (const auto& f : loocv.folds) {
    skipped += f.skipped;
    loocv_isolated = loocv_isolated && isolated(f);
    weights_ok = weights_ok && f.class_weight == neg_over_pos(d100, f.train);
    for (const auto& trial : f.trials) {
      for (std::size_t k = 0; k < f.inner_folds.size(); ++k) {
        std::vector<std::size_t> inner_train;
        std::set_difference(f.train.begin(), f.train.end(), f.inner_folds[k].begin(), f.inner_folds[k].end(),
                            std::back_inserter(inner_train));
        weights_ok = weights_ok && trial.fold_class_weights[k] == neg_over_pos(d100, inner_train);
        ++inner_checked;
      }
    }
  }
  // the library guard must reject an injected leak
  bool guard_fires = false;
  auto leaky = loocv.folds[0];
  leaky.inner_folds[0].push_back(leaky.test[0]);
  try {
    detector::verify_isolation(leaky);
  } catch (const LeakageError&) {
    guard_fires = true;
  }

  verdict(8,
          once && kfold_isolated && loocv.n_outer_fits == 100 && skipped == 0 && loocv_isolated && weights_ok &&
              guard_fires,
          fmt("20-fold CV on N=200: %.0f folds, every sample evaluated exactly once: ",
              static_cast<double>(kfold.folds.size())) +
              (once && kfold_isolated ? "yes" : "no") +
              fmt("; nested LOOCV on N=100: %.0f outer fits, %.0f skipped, leakage-free: ",
                  static_cast<double>(loocv.n_outer_fits), static_cast<double>(skipped)) +
              (loocv_isolated && guard_fires ? "yes" : "no") +
              fmt(", class weight = n_neg/n_pos on %.0f inner fits: ", static_cast<double>(inner_checked)) +
              (weights_ok ? "yes" : "no"));
}

}  // namespace

int main() {
  try {
    run_sweep();
    const Corpus corpus = build_corpus();
    check_aggregation(corpus);
    check_metrics();
    check_detector(corpus);
    check_protocols(corpus);
  } catch (const std::exception& e) {
    std::printf("FAIL acceptance aborted: %s\n", e.what());
    return 2;
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
