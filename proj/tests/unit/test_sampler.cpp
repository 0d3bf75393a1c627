//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>

#include "fixtures.hpp"
#include "stgg/error.hpp"
#include "stgg/mask_engine.hpp"
#include "stgg/sampler.hpp"

namespace stgg {
namespace {

constexpr float kNegInf = -std::numeric_limits<float>::infinity();

class SamplerTest : public ::testing::Test {
 protected:
  SamplerTest() {
    cfg_ = ModelConfig::for_vocab(vocab_, spec_, 32);
    cfg_.d_model = 16;
    cfg_.n_heads = 2;
    cfg_.n_layers = 2;
    // Larger weights so that conditioning visibly changes the logits.
    cfg_.init_std = 0.3;
    Rng rng(17);
    params_ = init_params<float>(cfg_, rng);
  }

  PropertyVector target() const {
    return standardize(spec_, { 3.0, std::nullopt, 2.0 });
  }

  std::vector<MolGraph> graphs_ = testing::parse_all(testing::small_smiles());
  Vocab vocab_ = induce_vocab(graphs_, 4);
  PropertySpec spec_ = testing::toy_spec();
  ModelConfig cfg_;
  ModelParams<float> params_;
};

TEST(Guidance, Endpoints) {
  RowVec<float> c(4), u(4);
  c << 1.5f, kNegInf, -0.25f, 3.0f;
  u << -2.0f, 0.5f, kNegInf, 7.0f;
  const RowVec<float> at1 = guided_logits(c, u, 1.0);
  EXPECT_EQ(at1[0], c[0]);
  EXPECT_EQ(at1[3], c[3]);
  const RowVec<float> at0 = guided_logits(c, u, 0.0);
  EXPECT_EQ(at0[0], u[0]);
  EXPECT_EQ(at0[3], u[3]);
  for (double w: { 0.0, 0.5, 1.0, 2.0 }) {
    const RowVec<float> g = guided_logits(c, u, w);
    EXPECT_EQ(g[1], kNegInf);
    EXPECT_EQ(g[2], kNegInf);
  }
  const RowVec<float> at2 = guided_logits(c, u, 2.0);
  EXPECT_FLOAT_EQ(at2[0], 2 * 1.5f + 2.0f);
  EXPECT_FLOAT_EQ(at2[3], 2 * 3.0f - 7.0f);
  EXPECT_THROW(guided_logits(c, RowVec<float>(3), 1.0), ArgumentError);
}

TEST(Guidance, Draws) {
  Rng rng(3);
  const Rng before = rng;
  EXPECT_EQ(draw_guidance(GuidanceMode::fixed(1.7), rng), 1.7);
  EXPECT_EQ(rng, before);

  const GuidanceMode m = GuidanceMode::random(0.5, 2.0);
  double sum = 0.0, lo = 10.0, hi = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double w = draw_guidance(m, rng);
    sum += w;
    lo = std::min(lo, w);
    hi = std::max(hi, w);
  }
  EXPECT_NEAR(sum / n, 1.25, 0.01);
  EXPECT_GE(lo, 0.5);
  EXPECT_LT(hi, 2.0);
  EXPECT_LT(lo, 0.51);
  EXPECT_GT(hi, 1.99);

  EXPECT_THROW(GuidanceMode::fixed(0.0).validate(), ArgumentError);
  EXPECT_THROW(GuidanceMode::random(2.0, 1.0).validate(), ArgumentError);
  EXPECT_THROW(GuidanceMode::random(0.0, 1.0).validate(), ArgumentError);
  EXPECT_EQ(m.to_json().at("mode"), "uniform");
}

TEST(SelfScore, HandValues) {
  PropertyVector t { { 1.0, 0.0, -2.0 }, { 0, 1, 0 }, { 2, PropertyVector::kMissing } };
  PropertyVector p { { 0.5, 9.0, -1.0 }, { 0, 0, 0 }, { 1, 0 } };
  // |0.5-1| + |-1+2| + (1 != 2)
  EXPECT_DOUBLE_EQ(self_score(p, t), 2.5);
  p.category[0] = 2;
  EXPECT_DOUBLE_EQ(self_score(p, t), 1.5);
  p.value.pop_back();
  EXPECT_THROW(self_score(p, t), ArgumentError);
}

TEST(SelfScore, ArgminTiesGoLow) {
  const double s[] = { 3.0, 1.0, 2.0, 1.0 };
  EXPECT_EQ(argmin_score(s), 1);
  const double one[] = { 5.0 };
  EXPECT_EQ(argmin_score(one), 0);
  EXPECT_THROW(argmin_score({}), ArgumentError);
}

TEST_F(SamplerTest, SamplesAreValid) {
  const Sampler s(params_, cfg_, vocab_, spec_);
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const TokenSeq t = s.sample_one(target(), i % 2 ? 1.0 : 1.8, 1.0, 0, rng);
    ASSERT_LE(static_cast<int>(t.size()), cfg_.max_len);
    EXPECT_NO_THROW(replay(vocab_, t, cfg_.max_len));
    const MolGraph g = decode(t, vocab_);
    for (int a = 0; a < g.atom_count(); ++a)
      EXPECT_LE(weighted_degree(g, a),
                vocab_.atom_token(vocab_.find_atom(g.atom(a)).value()).max_valency);
  }
}

TEST_F(SamplerTest, GreedyMatchesManualGuidedLoop) {
  const Sampler s(params_, cfg_, vocab_, spec_);
  for (double w: { 0.5, 1.0, 2.5 }) {
    Rng rng(2);
    const TokenSeq got = s.sample_one(target(), w, 0.0, 0, rng);

    InferenceSession c(params_, cfg_, vocab_, target());
    InferenceSession u(params_, cfg_, vocab_, all_missing(spec_));
    DecoderState st = init_state(vocab_, cfg_.max_len);
    TokenSeq want = { Vocab::kBos };
    c.push(Vocab::kBos);
    u.push(Vocab::kBos);
    while (!st.finished()) {
      const Mask m = mask(st);
      int pick = -1;
      double best = -std::numeric_limits<double>::infinity();
      for (int id: m.ids()) {
        const double cl = c.logits()[id], ul = u.logits()[id];
        const double x =
            std::isinf(cl) || std::isinf(ul) ? cl : w * cl + (1 - w) * ul;
        if (pick < 0 || x > best) {
          best = x;
          pick = id;
        }
      }
      advance_in_place(st, pick);
      want.push_back(pick);
      if (!st.finished()) {
        c.push(pick);
        u.push(pick);
      }
    }
    EXPECT_EQ(got, want) << "w = " << w;
  }
}

TEST_F(SamplerTest, FirstTokenFollowsMaskedSoftmax) {
  const Sampler s(params_, cfg_, vocab_, spec_);
  InferenceSession c(params_, cfg_, vocab_, target());
  c.push(Vocab::kBos);
  const Mask m = mask(init_state(vocab_, cfg_.max_len));
  std::vector<double> p(vocab_.size(), 0.0);
  double z = 0.0;
  for (int id: m.ids())
    z += p[id] = std::exp(static_cast<double>(c.logits()[id]));
  std::vector<int> hits(vocab_.size(), 0);
  Rng rng(4);
  const int n = 4000;
  for (int i = 0; i < n; ++i)
    ++hits[s.sample_one(target(), 1.0, 1.0, 0, rng)[1]];
  for (int id = 0; id < vocab_.size(); ++id) {
    const double expect = p[id] / z;
    // ~4 standard errors at n = 4000.
    EXPECT_NEAR(hits[id] / double(n), expect,
                4 * std::sqrt(expect * (1 - expect) / n) + 1e-9)
        << vocab_.token_text(id);
  }
}

TEST_F(SamplerTest, BestOfKIsThreadIndependent) {
  const Sampler s(params_, cfg_, vocab_, spec_);
  SampleRequest req;
  req.target = target();
  req.guidance = GuidanceMode::random();
  req.k = 9;
  req.seed = 77;
  const SampleResult a = s.sample_best_of_k(req, {}, 1);
  const SampleResult b = s.sample_best_of_k(req, {}, 4);
  ASSERT_EQ(a.candidates.size(), 9u);
  EXPECT_EQ(a.best, b.best);
  std::vector<double> scores;
  for (std::size_t i = 0; i < a.candidates.size(); ++i) {
    EXPECT_EQ(a.candidates[i].tokens, b.candidates[i].tokens);
    EXPECT_EQ(a.candidates[i].w, b.candidates[i].w);
    EXPECT_EQ(a.candidates[i].self_score, b.candidates[i].self_score);
    EXPECT_GE(a.candidates[i].w, 0.5);
    EXPECT_LT(a.candidates[i].w, 2.0);
    EXPECT_DOUBLE_EQ(a.candidates[i].self_score,
                     self_score(s.self_predict(a.candidates[i].tokens), req.target));
    scores.push_back(a.candidates[i].self_score);
  }
  EXPECT_EQ(a.best, argmin_score(scores));
  EXPECT_EQ(&a.best_candidate(), &a.candidates[a.best]);

  // Candidate i depends only on (seed, i).
  req.k = 3;
  const SampleResult c = s.sample_best_of_k(req);
  for (int i = 0; i < 3; ++i)
    EXPECT_EQ(c.candidates[i].tokens, a.candidates[i].tokens);
}

TEST_F(SamplerTest, ExternalPredictorAndSingleCandidate) {
  const Sampler s(params_, cfg_, vocab_, spec_);
  SampleRequest req;
  req.target = target();
  req.k = 5;
  req.seed = 3;
  int calls = 0;
  const Predictor pick_three = [&](const TokenSeq &, const MolGraph &g) {
    ++calls;
    PropertyVector pv = req.target;
    pv.value[0] += g.atom_count() == 3 ? 0.0 : 1.0;
    return pv;
  };
  const SampleResult r = s.sample_best_of_k(req, pick_three);
  EXPECT_EQ(calls, 5);
  bool any_three = false;
  for (const auto &c: r.candidates)
    any_three |= c.graph.atom_count() == 3;
  if (any_three)
    EXPECT_EQ(r.best_candidate().graph.atom_count(), 3);

  req.k = 1;
  EXPECT_EQ(s.sample_best_of_k(req).best, 0);
  req.k = 0;
  EXPECT_THROW(s.sample_best_of_k(req), ArgumentError);
}

TEST_F(SamplerTest, SelfPredict) {
  const Sampler s(params_, cfg_, vocab_, spec_);
  const TokenSeq t = encode(graphs_[1], vocab_);
  const PropertyVector z = s.self_predict(t);
  const RawProperties raw = s.self_predict_raw(t);
  ASSERT_EQ(raw.size(), 3u);
  EXPECT_NEAR(*raw[0], z.value[0] * 2.0 + 1.0, 1e-9);
  EXPECT_NEAR(*raw[1], z.value[1] * 0.5 - 3.0, 1e-9);
  EXPECT_EQ(*raw[2], z.category[0]);
  EXPECT_THROW(s.self_predict(std::span<const int>(t).first(t.size() - 1)),
               ArgumentError);
}

TEST_F(SamplerTest, Errors) {
  const Sampler s(params_, cfg_, vocab_, spec_);
  Rng rng(0);
  EXPECT_THROW(s.sample_one(target(), 1.0, 1.0, cfg_.max_len + 1, rng),
               ArgumentError);
  EXPECT_THROW(s.sample_one(target(), 1.0, -1.0, 0, rng), ArgumentError);
  ModelConfig other = cfg_;
  other.n_continuous = 1;
  EXPECT_THROW(Sampler(params_, other, vocab_, spec_), ArgumentError);
  SampleRequest req;
  req.target = all_missing(testing::toy_spec());
  req.target.category.clear();
  EXPECT_THROW(s.sample_best_of_k(req), ArgumentError);
}

}  // namespace
}  // namespace stgg
