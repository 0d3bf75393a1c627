//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef STGG_TRAINER_HPP_
#define STGG_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "stgg/checkpoint.hpp"
#include "stgg/dataset.hpp"
#include "stgg/model.hpp"

namespace stgg {

struct TrainConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.95;
  double eps = 1e-8;
  double weight_decay = 0.1;
  int epochs = 20;
  int batch_size = 32;
  int warmup_steps = 0;
  std::uint64_t seed = 0;
  double lambda_prop = 1.0;
  bool augment_random_order = true;
  /// Global gradient-norm clip; 0 disables.
  double grad_clip = 0.0;

  /// Throws ArgumentError when out of range.
  void validate() const;
  nlohmann::json to_json() const;
};

/// Cosine annealing after a linear warmup: lr at step 0 (no warmup) and 0 at
/// total_steps.
double lr_at(long step, long total_steps, const TrainConfig &cfg);

/// In-place AdamW on n scalars with decoupled weight decay. step is 1-based.
template <class T>
void adamw_update(T *param, const T *grad, T *m, T *v, std::size_t n,
                  long step, double lr, double weight_decay,
                  const TrainConfig &cfg);

/// One optimizer step over all tensors; norm parameters are not decayed.
/// Throws InvariantError naming the tensor on a non-finite gradient.
void adamw_step(ModelParams<float> &params, const ModelParams<float> &grads,
                OptimizerState &state, double lr, const TrainConfig &cfg);

/// Examples for one epoch: each molecule re-encoded (random traversal unless
/// augmentation is off), properties standardized and then randomly masked.
/// Sequences longer than max_len are skipped and counted.
std::vector<Example> make_examples(std::span<const Record> records,
                                   std::span<const int> indices,
                                   const Vocab &v, const PropertySpec &spec,
                                   const TrainConfig &cfg, int epoch,
                                   int max_len, int *skipped = nullptr);

struct EpochStats {
  int epoch = 0;
  double token_ce = 0.0;
  double prop_mse = 0.0;
  double lr = 0.0;
  double wallclock = 0.0;  ///< seconds since training started
  int skipped = 0;

  nlohmann::json to_json() const;
};

struct TrainResult {
  ModelParams<float> params;
  OptimizerState optimizer;
  std::vector<EpochStats> log;
};

/// Deterministic for a given seed. Starts from init (and its optimizer
/// state) when given, otherwise from init_params with the seed.
TrainResult train(const ModelConfig &mcfg, std::span<const Record> records,
                  const Vocab &v, const PropertySpec &spec,
                  const TrainConfig &cfg,
                  const std::function<void(const EpochStats &)> &on_epoch = {},
                  const Checkpoint *init = nullptr);

}  // namespace stgg

#endif  // STGG_TRAINER_HPP_
