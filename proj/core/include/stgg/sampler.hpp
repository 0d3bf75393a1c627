//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef STGG_SAMPLER_HPP_
#define STGG_SAMPLER_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "stgg/codec.hpp"
#include "stgg/hash.hpp"
#include "stgg/model.hpp"
#include "stgg/molgraph.hpp"
#include "stgg/properties.hpp"
#include "stgg/vocab.hpp"

namespace stgg {

/// Fixed w, or w ~ U(lo, hi) drawn per candidate.
struct GuidanceMode {
  bool uniform = false;
  double w = 1.0;
  double lo = 0.5;
  double hi = 2.0;

  static GuidanceMode fixed(double w) { return { false, w, 0.5, 2.0 }; }
  static GuidanceMode random(double lo = 0.5, double hi = 2.0) {
    return { true, 1.0, lo, hi };
  }
  /// Throws ArgumentError for w <= 0 or an empty/negative range.
  void validate() const;
  nlohmann::json to_json() const;
};

/// Draws a w from the mode (consumes rng only in uniform mode).
double draw_guidance(const GuidanceMode &mode, Rng &rng);

/// w * cond + (1 - w) * uncond; -inf entries pass through. Bit-exact cond
/// at w = 1 and uncond at w = 0. Throws ArgumentError on a shape mismatch.
RowVec<float> guided_logits(const RowVec<float> &cond,
                            const RowVec<float> &uncond, double w);

struct SampleRequest {
  PropertyVector target;  ///< standardized; any subset present
  GuidanceMode guidance;
  int k = 1;
  double temperature = 1.0;
  int max_len = 0;  ///< 0 = model max_len
  std::uint64_t seed = 0;
};

struct Candidate {
  TokenSeq tokens;
  MolGraph graph;
  PropertyVector predicted;  ///< standardized
  double w = 1.0;
  double self_score = 0.0;
};

struct SampleResult {
  int best = 0;
  std::vector<Candidate> candidates;

  const Candidate &best_candidate() const { return candidates.at(best); }
};

/// Sum of |z_pred - z_target| over present continuous targets plus the
/// number of mismatched present categorical targets. Throws ArgumentError
/// when the vectors have different shapes.
double self_score(const PropertyVector &pred, const PropertyVector &target);

/// Standardized property prediction for a finished candidate.
using Predictor =
    std::function<PropertyVector(const TokenSeq &, const MolGraph &)>;

class Sampler {
 public:
  /// Keeps references; all four must outlive the sampler.
  Sampler(const ModelParams<float> &params, const ModelConfig &cfg,
          const Vocab &v, const PropertySpec &spec);

  /// One masked ancestral sample. temperature 0 takes the argmax.
  TokenSeq sample_one(const PropertyVector &target, double w,
                      double temperature, int max_len, Rng &rng) const;

  /// Property head at the final token under all-missing conditioning
  /// (standardized). Throws ArgumentError unless tokens is a complete
  /// <bos> ... <eos> sequence.
  PropertyVector self_predict(std::span<const int> tokens) const;
  RawProperties self_predict_raw(std::span<const int> tokens) const;

  /// Candidate i uses the stream derive_seed(seed, i), so results do not
  /// depend on threads. Ties in self_score go to the lowest index.
  SampleResult sample_best_of_k(const SampleRequest &req,
                                const Predictor &predictor = {},
                                int threads = 1) const;

  const ModelConfig &config() const { return cfg_; }
  const PropertySpec &spec() const { return spec_; }
  const Vocab &vocab() const { return v_; }

 private:
  const ModelParams<float> &params_;
  const ModelConfig &cfg_;
  const Vocab &v_;
  const PropertySpec &spec_;
};

/// Index of the minimum score, lowest index on ties.
int argmin_score(std::span<const double> scores);

}  // namespace stgg

#endif  // STGG_SAMPLER_HPP_
