#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "support.hpp"
#include "tokattr/attribution/attribute.hpp"
#include "tokattr/attribution/coarse.hpp"
#include "tokattr/attribution/heads.hpp"
#include "tokattr/attribution/probe.hpp"
#include "tokattr/attribution/sources.hpp"
#include "tokattr/attribution/taylor.hpp"
#include "tokattr/error.hpp"
#include "tokattr/model/forward.hpp"
#include "tokattr/model/toy.hpp"

using namespace tokattr;
using namespace tokattr::attribution;
using tokattr::testing::random_tokens;
using tokattr::testing::toy_config;

namespace {

// Reference softmax entry in extended precision.
double softmax_at(const std::vector<long double>& z, std::size_t y) {
  long double mx = *std::max_element(z.begin(), z.end());
  long double den = 0;
  for (auto v : z) den += std::exp(v - mx);
  return static_cast<double>(std::exp(z[y] - mx) / den);
}

std::vector<long double> logits_of(const RowVector& h, const Matrix& u) {
  std::vector<long double> z(static_cast<std::size_t>(u.rows()));
  for (Eigen::Index v = 0; v < u.rows(); ++v) {
    long double acc = 0;
    for (Eigen::Index k = 0; k < u.cols(); ++k) acc += static_cast<long double>(h(k)) * u(v, k);
    z[static_cast<std::size_t>(v)] = acc;
  }
  return z;
}

model::ModelBundle with_zero_blocks(const model::ModelBundle& m) {
  model::ModelWeights w = m.weights();
  for (auto& layer : w.layers) {
    layer.attn.w_o.setZero();
    layer.ffn.w_out.setZero();
    if (layer.ffn.b_out.size()) layer.ffn.b_out.setZero();
  }
  return model::ModelBundle(m.config(), std::move(w), m.vocab());
}

}  // namespace

TEST(Probe, ZeroHiddenIsUniform) {
  const auto m = model::make_toy_model(toy_config(1, 1, 8, 10), 0);
  const RowVector h = RowVector::Zero(8);
  for (int y = 0; y < 10; ++y) EXPECT_NEAR(probe(h, m, y), 0.1, 1e-15);
}

TEST(Probe, IdentityUnembeddingMatchesClosedForm) {
  const Matrix u = Matrix::Identity(8, 8);
  RowVector h = RowVector::Zero(8);
  h(3) = 10.0;
  const double expected = std::exp(10.0) / (std::exp(10.0) + 7.0);
  EXPECT_NEAR(probe(h, u, 3), expected, 1e-15);
  EXPECT_NEAR(probe(h, u, 0), 1.0 / (std::exp(10.0) + 7.0), 1e-15);
}

TEST(Probe, SumsToOneAndSurvivesLargeLogits) {
  const auto m = model::make_toy_model(toy_config(1, 2, 16, 50), 2);
  RowVector h = RowVector::Random(16) * 400.0;  // logits far beyond exp's range
  double total = 0.0;
  for (int y = 0; y < 50; ++y) {
    const double p = probe(h, m, y);
    EXPECT_TRUE(std::isfinite(p));
    total += p;
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Probe, RejectsBadArguments) {
  const auto m = model::make_toy_model(toy_config(1, 1, 8, 10), 0);
  RowVector h = RowVector::Zero(8);
  EXPECT_THROW(probe(h, m, 10), IndexError);
  EXPECT_THROW(probe(h, m, -1), IndexError);
  h(2) = std::nan("");
  EXPECT_THROW(probe(h, m, 1), NonFiniteError);
}

TEST(Coarse, ZeroBlocksLeaveOnlyInitialAndNorm) {
  const auto m = with_zero_blocks(model::make_toy_model(toy_config(3, 2, 16, 50), 4));
  const auto tokens = random_tokens(6, 50, 4);
  const auto cache = model::forward_cached(m, tokens);
  const auto d = decompose_coarse(cache, m, 4, tokens[5]);
  for (double v : d.att_delta) EXPECT_EQ(v, 0.0);
  for (double v : d.ffn_delta) EXPECT_EQ(v, 0.0);
  EXPECT_DOUBLE_EQ(d.p_initial + d.ln_delta, d.p_final);
}

TEST(Coarse, TelescopesToFinalProbability) {
  const auto m = model::make_toy_model(toy_config(4, 4, 64, 200), 1);
  const auto tokens = random_tokens(16, 200, 21);
  const auto cache = model::forward_cached(m, tokens);
  for (int pos = 0; pos + 1 < 16; ++pos) {
    const int target = tokens[static_cast<std::size_t>(pos + 1)];
    const auto d = decompose_coarse(cache, m, pos, target);
    EXPECT_EQ(d.p_final, cache.final_probs(pos, target));
    EXPECT_LE(d.residual, 1e-9);
    EXPECT_GE(d.p_initial, 0.0);
    EXPECT_LE(d.p_initial, 1.0);
  }
}

TEST(Coarse, SingleLayerDeltaMatchesDefinition) {
  const auto m = model::make_toy_model(toy_config(1, 2, 16, 50), 8);
  const auto tokens = random_tokens(5, 50, 8);
  const auto cache = model::forward_cached(m, tokens);
  const int pos = 3, target = tokens[4];
  const auto d = decompose_coarse(cache, m, pos, target);
  const RowVector h0 = cache.h0.row(pos);
  const RowVector mid = h0 + RowVector(cache.attn_residual[0].row(pos));
  EXPECT_EQ(d.att_delta[0], probe(mid, m, target) - probe(h0, m, target));
}

TEST(Coarse, RejectsBadPosition) {
  const auto m = model::make_toy_model(toy_config(1, 1, 8, 10), 0);
  const auto cache = model::forward_cached(m, std::vector<int>{1, 2, 3});
  EXPECT_THROW(decompose_coarse(cache, m, 3, 0), IndexError);
  EXPECT_THROW(decompose_coarse(cache, m, 0, 10), IndexError);
}

TEST(Heads, LogitContributionIsHeadOutputDotTargetRow) {
  const auto m = model::make_toy_model(toy_config(2, 4, 32, 60), 5);
  const auto tokens = random_tokens(9, 60, 5);
  const auto cache = model::forward_cached(m, tokens);
  for (int h = 0; h < 4; ++h) {
    const double direct = cache.head_out[1][static_cast<std::size_t>(h)].row(6).dot(m.unembedding().row(17));
    EXPECT_NEAR(head_logit_contribution(cache, m, 1, h, 6, 17), direct, 1e-14);
  }
  const auto all = head_logit_contributions(cache, m, 1, 6, 17);
  ASSERT_EQ(all.size(), 4u);
  EXPECT_EQ(all[2], head_logit_contribution(cache, m, 1, 2, 6, 17));
}

TEST(Heads, ApportionmentFollowsSoftmax) {
  const std::vector<double> dz = {0.3, -1.2, 2.0, 0.0};
  const auto a = apportion_heads(0.05, dz);
  const std::vector<long double> z(dz.begin(), dz.end());
  double share_sum = 0.0;
  for (std::size_t h = 0; h < dz.size(); ++h) {
    EXPECT_NEAR(a.weight[h], softmax_at(z, h), 1e-15);
    EXPECT_NEAR(a.prob_share[h], 0.05 * softmax_at(z, h), 1e-16);
    share_sum += a.prob_share[h];
  }
  EXPECT_NEAR(share_sum, 0.05, 1e-15);
}

TEST(Heads, ApportionmentHandlesExtremesAndZeroDelta) {
  const auto big = apportion_heads(-0.2, std::vector<double>{1000.0, 1001.0});
  EXPECT_TRUE(std::isfinite(big.weight[0]));
  EXPECT_NEAR(big.weight[1], 1.0 / (1.0 + std::exp(-1.0)), 1e-15);
  const auto zero = apportion_heads(0.0, std::vector<double>{3.0, -1.0, 0.5});
  for (double s : zero.prob_share) EXPECT_EQ(s, 0.0);
  const auto tie = apportion_heads(0.3, std::vector<double>{0.7, 0.7, 0.7});
  for (double w : tie.weight) EXPECT_NEAR(w, 1.0 / 3.0, 1e-15);
}

TEST(Sources, SpansMustPartitionTheRow) {
  SourceSpans ok{{0, 1}, {2}, {3}, {4}};
  EXPECT_EQ(ok.labels(5)[2], Source::rag);

  SourceSpans overlap{{0, 1, 2}, {2}, {3}, {4}};
  try {
    overlap.labels(5);
    FAIL() << "expected SpanError";
  } catch (const SpanError& e) {
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos);
  }
  SourceSpans gap{{0}, {2}, {3}, {4}};
  EXPECT_THROW(gap.labels(5), SpanError);
  SourceSpans outside{{0, 1}, {2}, {3}, {4, 5}};
  EXPECT_THROW(outside.labels(5), SpanError);
}

TEST(Sources, SharesFollowAttentionMass) {
  HeadAttribution heads = apportion_heads(0.4, std::vector<double>{0.0});
  const std::vector<double> row = {0.2, 0.3, 0.5};
  const std::vector<std::span<const double>> rows = {row};
  const SourceSpans spans{{0}, {1}, {}, {2}};
  const auto s = map_sources(heads, rows, spans);
  EXPECT_NEAR(s[0], 0.08, 1e-16);
  EXPECT_NEAR(s[1], 0.12, 1e-16);
  EXPECT_EQ(s[2], 0.0);
  EXPECT_NEAR(s[3], 0.2, 1e-16);
}

TEST(Sources, SharesConserveHeadMass) {
  const auto heads = apportion_heads(-0.13, std::vector<double>{0.5, -0.2, 1.1});
  const std::vector<std::vector<double>> raw = {
      {0.1, 0.2, 0.3, 0.4, 0.0}, {0.5, 0.0, 0.1, 0.2, 0.2}, {0.25, 0.25, 0.25, 0.125, 0.125}};
  std::vector<std::span<const double>> rows(raw.begin(), raw.end());
  const SourceSpans spans{{0, 1}, {2}, {3}, {4}};
  const auto s = map_sources(heads, rows, spans);
  EXPECT_NEAR(std::accumulate(s.begin(), s.end(), 0.0), -0.13, 1e-15);
}

TEST(Sources, RejectsZeroMassRow) {
  const auto heads = apportion_heads(0.1, std::vector<double>{0.0});
  const std::vector<double> row = {0.0, 0.0};
  const std::vector<std::span<const double>> rows = {row};
  EXPECT_THROW(map_sources(heads, rows, SourceSpans{{0}, {}, {}, {1}}), DataError);
}

TEST(Attribute, SpansForRowAssignSelfAndPast) {
  ContextLayout layout{{0, 1}, {2, 3, 4}, 5};
  const auto first = spans_for_row(layout, 4);
  EXPECT_EQ(first.query, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(first.rag, (std::vector<std::size_t>{2, 3}));
  EXPECT_TRUE(first.past.empty());
  EXPECT_EQ(first.self, (std::vector<std::size_t>{4}));
  const auto later = spans_for_row(layout, 7);
  EXPECT_EQ(later.rag, (std::vector<std::size_t>{2, 3, 4}));
  EXPECT_EQ(later.past, (std::vector<std::size_t>{5, 6}));
  EXPECT_EQ(later.self, (std::vector<std::size_t>{7}));
}

TEST(Attribute, SevenSourcesSumToFinalProbability) {
  const auto m = model::make_toy_model(toy_config(4, 4, 64, 200), 1);
  const auto tokens = random_tokens(20, 200, 77);
  const auto cache = model::forward_cached(m, tokens);
  const ContextLayout layout{{0, 1, 2, 3}, {4, 5, 6, 7, 8, 9}, 10};
  const auto out = attribute_response(cache, m, layout);
  ASSERT_EQ(out.size(), 10u);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& t = out[i];
    EXPECT_EQ(t.position, static_cast<int>(9 + i));
    EXPECT_EQ(t.target, tokens[10 + i]);
    EXPECT_LE(std::abs(t.vector.sum() - cache.final_probs(t.position, t.target)), 1e-9);
    EXPECT_EQ(t.vector[Source::initial], t.coarse.p_initial);
    EXPECT_EQ(t.vector[Source::ln], t.coarse.ln_delta);
    double ffn = 0.0, att = 0.0, shares = 0.0;
    for (std::size_t l = 0; l < 4; ++l) {
      ffn += t.coarse.ffn_delta[l];
      att += t.coarse.att_delta[l];
      const auto& layer = t.layers[l];
      const double head_sum = std::accumulate(layer.heads.prob_share.begin(), layer.heads.prob_share.end(), 0.0);
      EXPECT_NEAR(head_sum, t.coarse.att_delta[l], 1e-12);
      const double src_sum = std::accumulate(layer.sources.begin(), layer.sources.end(), 0.0);
      EXPECT_NEAR(src_sum, head_sum, 1e-12);
      shares += src_sum;
    }
    EXPECT_NEAR(t.vector[Source::ffn], ffn, 1e-15);
    const double inputs =
        t.vector[Source::query] + t.vector[Source::rag] + t.vector[Source::past] + t.vector[Source::self];
    EXPECT_NEAR(inputs, att, 1e-12);
    EXPECT_NEAR(inputs, shares, 1e-12);
  }
  EXPECT_EQ(out[0].vector[Source::past], 0.0);
}

TEST(Attribute, RequiresContextBeforeResponse) {
  const auto m = model::make_toy_model(toy_config(1, 1, 8, 10), 0);
  const auto cache = model::forward_cached(m, std::vector<int>{1, 2, 3});
  EXPECT_THROW(attribute_response(cache, m, ContextLayout{{}, {}, 0}), SpanError);
}

TEST(Taylor, RemainderShrinksQuadratically) {
  const auto m = model::make_toy_model(toy_config(2, 2, 16, 50), 3);
  const auto tokens = random_tokens(8, 50, 3);
  const auto cache = model::forward_cached(m, tokens);
  std::vector<double> log_eps, log_err, log_target_err;
  for (int k = 2; k <= 6; ++k) {
    const double eps = std::ldexp(1.0, -k);
    const auto t = taylor_check(cache, m, 1, 5, tokens[6], eps);
    log_eps.push_back(std::log(eps));
    log_err.push_back(std::log(t.abs_error));
    log_target_err.push_back(std::log(t.target_only_error));
  }
  auto slope = [&](const std::vector<double>& y) {
    const double mx = std::accumulate(log_eps.begin(), log_eps.end(), 0.0) / 5.0;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / 5.0;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
      num += (log_eps[i] - mx) * (y[i] - my);
      den += (log_eps[i] - mx) * (log_eps[i] - mx);
    }
    return num / den;
  };
  EXPECT_NEAR(slope(log_err), 2.0, 0.3);
  // dropping the off-target logits leaves a first-order error
  EXPECT_NEAR(slope(log_target_err), 1.0, 0.3);
}

TEST(Taylor, GradientFactorMatchesFiniteDifference) {
  const auto m = model::make_toy_model(toy_config(2, 2, 16, 50), 9);
  const auto tokens = random_tokens(8, 50, 9);
  const auto cache = model::forward_cached(m, tokens);
  const int layer = 1, pos = 4, y = tokens[5];
  const auto t = taylor_check(cache, m, layer, pos, y, 0.25);
  auto z = logits_of(cache.layer_input(layer).row(pos), m.unembedding());
  const long double step = 1e-5L;
  const auto idx = static_cast<std::size_t>(y);
  z[idx] += step;
  const double up = softmax_at(z, idx);
  z[idx] -= 2 * step;
  const double down = softmax_at(z, idx);
  const double fd = (up - down) / (2.0 * static_cast<double>(step));
  EXPECT_LE(std::abs(fd - t.gradient_factor) / t.gradient_factor, 1e-4);

  const auto dz = head_logit_contributions(cache, m, layer, pos, y);
  EXPECT_NEAR(t.logit_sum, dz[0] + dz[1], 1e-14);
  EXPECT_NEAR(t.first_order_estimate, 0.25 * t.gradient_factor * t.logit_sum, 1e-16);
}

TEST(Taylor, RejectsScaleOutsideUnitInterval) {
  const auto m = model::make_toy_model(toy_config(1, 1, 8, 10), 0);
  const auto cache = model::forward_cached(m, std::vector<int>{1, 2});
  EXPECT_THROW(taylor_check(cache, m, 0, 0, 2, 0.0), DataError);
  EXPECT_THROW(taylor_check(cache, m, 0, 0, 2, 1.5), DataError);
  EXPECT_THROW(taylor_check(cache, m, 1, 0, 2, 0.5), IndexError);
}
