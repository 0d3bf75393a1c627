//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "stgg/sampler.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "stgg/error.hpp"
#include "stgg/mask_engine.hpp"

namespace stgg {

void GuidanceMode::validate() const {
  if (uniform) {
    if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi))
      throw ArgumentError("guidance range needs 0 < lo <= hi");
  } else if (!(w > 0.0) || !std::isfinite(w)) {
    throw ArgumentError("guidance w must be > 0");
  }
}

nlohmann::json GuidanceMode::to_json() const {
  if (uniform)
    return { { "mode", "uniform" }, { "lo", lo }, { "hi", hi } };
  return { { "mode", "fixed" }, { "w", w } };
}

double draw_guidance(const GuidanceMode &mode, Rng &rng) {
  if (!mode.uniform)
    return mode.w;
  return std::uniform_real_distribution<double>(mode.lo, mode.hi)(rng);
}

RowVec<float> guided_logits(const RowVec<float> &cond,
                            const RowVec<float> &uncond, double w) {
  if (cond.size() != uncond.size())
    throw ArgumentError("guided_logits: shape mismatch");
  RowVec<float> out(cond.size());
  const float wf = static_cast<float>(w);
  const float uf = static_cast<float>(1.0 - w);
  for (Eigen::Index i = 0; i < cond.size(); ++i) {
    const float c = cond[i], u = uncond[i];
    if (std::isinf(c) && c < 0)
      out[i] = c;
    else if (std::isinf(u) && u < 0)
      out[i] = u;
    else
      out[i] = wf * c + uf * u;
  }
  return out;
}

double self_score(const PropertyVector &pred, const PropertyVector &target) {
  if (pred.value.size() != target.value.size() ||
      pred.missing.size() != target.missing.size() ||
      pred.category.size() != target.category.size())
    throw ArgumentError("self_score: property vectors differ in shape");
  double s = 0.0;
  for (std::size_t i = 0; i < target.value.size(); ++i)
    if (!target.missing[i])
      s += std::abs(pred.value[i] - target.value[i]);
  for (std::size_t i = 0; i < target.category.size(); ++i)
    if (target.category[i] != PropertyVector::kMissing)
      s += pred.category[i] != target.category[i] ? 1.0 : 0.0;
  return s;
}

int argmin_score(std::span<const double> scores) {
  if (scores.empty())
    throw ArgumentError("argmin_score: no scores");
  int best = 0;
  for (int i = 1; i < static_cast<int>(scores.size()); ++i)
    if (scores[i] < scores[best])
      best = i;
  return best;
}

Sampler::Sampler(const ModelParams<float> &params, const ModelConfig &cfg,
                 const Vocab &v, const PropertySpec &spec)
    : params_(params), cfg_(cfg), v_(v), spec_(spec) {
  if (cfg.vocab_size != v.size() || cfg.r_max != v.r_max())
    throw ArgumentError("model config does not match vocabulary");
  if (cfg.n_continuous != spec.continuous_count() ||
      cfg.cardinalities != spec.cardinalities())
    throw ArgumentError("model config does not match property spec");
}

TokenSeq Sampler::sample_one(const PropertyVector &target, double w,
                             double temperature, int max_len,
                             Rng &rng) const {
  if (max_len <= 0)
    max_len = cfg_.max_len;
  if (max_len > cfg_.max_len)
    throw ArgumentError("max_len exceeds the model's " +
                        std::to_string(cfg_.max_len));
  if (!(temperature >= 0.0))
    throw ArgumentError("temperature must be >= 0");

  const bool guided = w != 1.0 && !is_all_missing(target);
  InferenceSession cond(params_, cfg_, v_, target);
  std::optional<InferenceSession> uncond;
  if (guided)
    uncond.emplace(params_, cfg_, v_, all_missing(spec_));

  DecoderState state = init_state(v_, max_len);
  TokenSeq out = { Vocab::kBos };
  cond.push(Vocab::kBos);
  if (uncond)
    uncond->push(Vocab::kBos);

  const int V = v_.size();
  std::vector<double> p(V);
  while (!state.finished()) {
    const RowVec<float> g =
        guided ? guided_logits(cond.logits(), uncond->logits(), w)
               : cond.logits();
    const Mask m = mask(state);
    int pick = -1;
    if (temperature == 0.0) {
      float best = -std::numeric_limits<float>::infinity();
      for (int i = 0; i < V; ++i)
        if (m[i] && (pick < 0 || g[i] > best)) {
          best = g[i];
          pick = i;
        }
    } else {
      double mx = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < V; ++i)
        if (m[i])
          mx = std::max(mx, static_cast<double>(g[i]));
      if (!std::isfinite(mx))
        throw InvariantError("no finite logit among allowed tokens at " +
                             std::to_string(state.position()));
      double sum = 0.0;
      for (int i = 0; i < V; ++i) {
        p[i] = m[i] ? std::exp((g[i] - mx) / temperature) : 0.0;
        sum += p[i];
      }
      double u = std::uniform_real_distribution<double>(0.0, sum)(rng);
      for (int i = 0; i < V; ++i) {
        if (p[i] <= 0.0)
          continue;
        pick = i;
        if (u < p[i])
          break;
        u -= p[i];
      }
    }
    STGG_CHECK(pick >= 0, "empty token mask");
    advance_in_place(state, pick);
    out.push_back(pick);
    if (state.finished())
      break;
    cond.push(pick);
    if (uncond)
      uncond->push(pick);
  }
  return out;
}

PropertyVector Sampler::self_predict(std::span<const int> tokens) const {
  if (tokens.size() < 2 || tokens.front() != Vocab::kBos ||
      tokens.back() != Vocab::kEos)
    throw ArgumentError("self_predict needs a complete <bos> ... <eos> sequence");
  if (static_cast<int>(tokens.size()) > cfg_.max_len)
    throw ArgumentError("sequence longer than the model's max_len");
  InferenceSession s(params_, cfg_, v_, all_missing(spec_));
  for (int t: tokens)
    s.push(t);
  return decode_property_row(cfg_, s.properties());
}

RawProperties Sampler::self_predict_raw(std::span<const int> tokens) const {
  return destandardize(spec_, self_predict(tokens));
}

SampleResult Sampler::sample_best_of_k(const SampleRequest &req,
                                       const Predictor &predictor,
                                       int threads) const {
  if (req.k < 1)
    throw ArgumentError("k must be >= 1");
  req.guidance.validate();
  if (req.target.value.size() !=
          static_cast<std::size_t>(spec_.continuous_count()) ||
      req.target.category.size() !=
          static_cast<std::size_t>(spec_.categorical_count()))
    throw ArgumentError("target does not match property spec");

  SampleResult res;
  res.candidates.resize(req.k);
  auto run = [&](int i) {
    Rng rng(derive_seed(req.seed, static_cast<std::uint64_t>(i)));
    Candidate &c = res.candidates[i];
    c.w = draw_guidance(req.guidance, rng);
    c.tokens = sample_one(req.target, c.w, req.temperature, req.max_len, rng);
    c.graph = decode(c.tokens, v_);
    c.predicted =
        predictor ? predictor(c.tokens, c.graph) : self_predict(c.tokens);
    c.self_score = self_score(c.predicted, req.target);
  };

  const int n_threads = std::max(1, std::min(threads, req.k));
  if (n_threads == 1) {
    for (int i = 0; i < req.k; ++i)
      run(i);
  } else {
    std::atomic<int> next{ 0 };
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t)
      pool.emplace_back([&] {
        for (int i = next++; i < req.k; i = next++) {
          try {
            run(i);
          } catch (...) {
            std::lock_guard lock(err_mu);
            if (!err)
              err = std::current_exception();
          }
        }
      });
    for (auto &th: pool)
      th.join();
    if (err)
      std::rethrow_exception(err);
  }

  std::vector<double> scores;
  for (const Candidate &c: res.candidates)
    scores.push_back(c.self_score);
  res.best = req.k == 1 ? 0 : argmin_score(scores);
  return res;
}

}  // namespace stgg
