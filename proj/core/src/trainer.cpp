//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "stgg/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>

#include "stgg/codec.hpp"
#include "stgg/error.hpp"

namespace stgg {

namespace {

// Seed streams.
constexpr std::uint64_t kShuffleStream = 0x5348554646ULL;
constexpr std::uint64_t kExampleStream = 0x4558414d50ULL;
constexpr std::uint64_t kInitStream = 0x494e4954ULL;

}  // namespace

void TrainConfig::validate() const {
  if (!(lr > 0.0) || !std::isfinite(lr))
    throw ArgumentError("lr must be > 0");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0))
    throw ArgumentError("betas must lie in (0, 1)");
  if (!(eps > 0.0))
    throw ArgumentError("eps must be > 0");
  if (weight_decay < 0.0)
    throw ArgumentError("weight_decay must be >= 0");
  if (epochs < 0 || batch_size < 1 || warmup_steps < 0)
    throw ArgumentError("epochs, batch_size, warmup_steps out of range");
  if (lambda_prop < 0.0 || grad_clip < 0.0)
    throw ArgumentError("lambda_prop and grad_clip must be >= 0");
}

nlohmann::json TrainConfig::to_json() const {
  return { { "lr", lr },
           { "beta1", beta1 },
           { "beta2", beta2 },
           { "eps", eps },
           { "weight_decay", weight_decay },
           { "epochs", epochs },
           { "batch_size", batch_size },
           { "warmup_steps", warmup_steps },
           { "seed", seed },
           { "lambda_prop", lambda_prop },
           { "augment_random_order", augment_random_order },
           { "grad_clip", grad_clip } };
}

nlohmann::json EpochStats::to_json() const {
  return { { "epoch", epoch },       { "token_ce", token_ce },
           { "prop_mse", prop_mse }, { "lr", lr },
           { "wallclock", wallclock }, { "skipped", skipped } };
}

double lr_at(long step, long total_steps, const TrainConfig &cfg) {
  const long warm = cfg.warmup_steps;
  if (step < warm)
    return cfg.lr * static_cast<double>(step + 1) / static_cast<double>(warm);
  const long span = total_steps - warm;
  if (span <= 0)
    return cfg.lr;
  const double progress =
      std::clamp(static_cast<double>(step - warm) / static_cast<double>(span),
                 0.0, 1.0);
  return cfg.lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

template <class T>
void adamw_update(T *param, const T *grad, T *m, T *v, std::size_t n,
                  long step, double lr, double weight_decay,
                  const TrainConfig &cfg) {
  const double b1 = cfg.beta1, b2 = cfg.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grad[i];
    const double mi = b1 * m[i] + (1.0 - b1) * g;
    const double vi = b2 * v[i] + (1.0 - b2) * g * g;
    m[i] = static_cast<T>(mi);
    v[i] = static_cast<T>(vi);
    const double mhat = mi / c1;
    const double vhat = vi / c2;
    const double p = param[i];
    param[i] = static_cast<T>(p * (1.0 - lr * weight_decay) -
                              lr * mhat / (std::sqrt(vhat) + cfg.eps));
  }
}

template void adamw_update<float>(float *, const float *, float *, float *,
                                  std::size_t, long, double, double,
                                  const TrainConfig &);
template void adamw_update<double>(double *, const double *, double *,
                                   double *, std::size_t, long, double,
                                   double, const TrainConfig &);

void adamw_step(ModelParams<float> &params, const ModelParams<float> &grads,
                OptimizerState &state, double lr, const TrainConfig &cfg) {
  std::vector<const Mat<float> *> g, m, v;
  grads.visit([&](const std::string &, const Mat<float> &x, bool) {
    g.push_back(&x);
  });
  if (state.m.tok_emb.size() == 0) {
    state.m = params.zeros_like();
    state.v = params.zeros_like();
  }
  state.m.visit([&](const std::string &, const Mat<float> &x, bool) {
    m.push_back(&x);
  });
  state.v.visit([&](const std::string &, const Mat<float> &x, bool) {
    v.push_back(&x);
  });

  // Check everything before touching any state.
  std::size_t i = 0;
  params.visit([&](const std::string &name, Mat<float> &p, bool) {
    if (i >= g.size() || g[i]->rows() != p.rows() || g[i]->cols() != p.cols() ||
        m[i]->rows() != p.rows() || v[i]->rows() != p.rows())
      throw InvariantError("gradient/optimizer shape mismatch at " + name);
    if (!g[i]->allFinite()) {
      Eigen::Index r = 0, c = 0;
      for (r = 0; r < p.rows(); ++r) {
        for (c = 0; c < p.cols(); ++c)
          if (!std::isfinite((*g[i])(r, c)))
            break;
        if (c < p.cols())
          break;
      }
      throw InvariantError("non-finite gradient in " + name + " at (" +
                           std::to_string(r) + ", " + std::to_string(c) +
                           "), step " + std::to_string(state.step + 1));
    }
    ++i;
  });
  if (i != g.size())
    throw InvariantError("gradient tensor count mismatch");

  ++state.step;
  i = 0;
  params.visit([&](const std::string &, Mat<float> &p, bool decay) {
    adamw_update<float>(p.data(), g[i]->data(),
                        const_cast<float *>(m[i]->data()),
                        const_cast<float *>(v[i]->data()),
                        static_cast<std::size_t>(p.size()), state.step, lr,
                        decay ? cfg.weight_decay : 0.0, cfg);
    ++i;
  });
}

std::vector<Example> make_examples(std::span<const Record> records,
                                   std::span<const int> indices,
                                   const Vocab &v, const PropertySpec &spec,
                                   const TrainConfig &cfg, int epoch,
                                   int max_len, int *skipped) {
  std::vector<Example> out;
  out.reserve(indices.size());
  int skip = 0;
  const std::uint64_t epoch_seed =
      derive_seed(derive_seed(cfg.seed, kExampleStream),
                  static_cast<std::uint64_t>(epoch));
  for (int idx: indices) {
    const Record &r = records[idx];
    Rng rng(derive_seed(epoch_seed, static_cast<std::uint64_t>(idx)));
    const Traversal t = cfg.augment_random_order
                            ? Traversal::randomized(rng())
                            : Traversal::canonical();
    Example ex;
    ex.tokens = encode(r.graph, v, t);
    if (static_cast<int>(ex.tokens.size()) > max_len) {
      ++skip;
      continue;
    }
    ex.target = standardize(spec, r.raw);
    const int total = spec.size();
    ex.cond = mask_properties(ex.target, sample_mask_count(total, rng), rng);
    out.push_back(std::move(ex));
  }
  if (skipped)
    *skipped = skip;
  return out;
}

TrainResult train(const ModelConfig &mcfg, std::span<const Record> records,
                  const Vocab &v, const PropertySpec &spec,
                  const TrainConfig &cfg,
                  const std::function<void(const EpochStats &)> &on_epoch,
                  const Checkpoint *init) {
  cfg.validate();
  mcfg.validate();
  if (mcfg.vocab_size != v.size() || mcfg.r_max != v.r_max())
    throw ArgumentError("model config does not match vocabulary");
  if (mcfg.n_continuous != spec.continuous_count() ||
      mcfg.cardinalities != spec.cardinalities())
    throw ArgumentError("model config does not match property spec");
  if (records.empty())
    throw DataError("empty training set");

  TrainResult res;
  if (init) {
    res.params = init->params;
    if (init->optimizer)
      res.optimizer = *init->optimizer;
  } else {
    Rng rng(derive_seed(cfg.seed, kInitStream));
    res.params = init_params<float>(mcfg, rng);
  }

  const int n = static_cast<int>(records.size());
  const long steps_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
  const long total_steps = steps_per_epoch * cfg.epochs;
  const long step0 = res.optimizer.step;
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<int> order(n);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng shuf(derive_seed(derive_seed(cfg.seed, kShuffleStream),
                         static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), shuf);

    EpochStats st;
    st.epoch = epoch;
    double ce_sum = 0.0, mse_sum = 0.0;
    long ce_n = 0, mse_n = 0;
    for (long s = 0; s < steps_per_epoch; ++s) {
      const std::size_t lo = static_cast<std::size_t>(s) * cfg.batch_size;
      const std::size_t hi =
          std::min<std::size_t>(lo + cfg.batch_size, order.size());
      int skipped = 0;
      const std::vector<Example> ex = make_examples(
          records, std::span<const int>(order).subspan(lo, hi - lo), v, spec,
          cfg, epoch, mcfg.max_len, &skipped);
      st.skipped += skipped;
      if (ex.empty())
        continue;
      const Batch b = make_batch(ex, v);
      ModelParams<float> grad;
      const LossParts lp =
          loss_and_grad<float>(res.params, mcfg, b, cfg.lambda_prop, &grad);
      ce_sum += lp.token_ce * lp.token_targets;
      ce_n += lp.token_targets;
      mse_sum += lp.prop_mse * b.rows();
      mse_n += b.rows();

      if (cfg.grad_clip > 0.0) {
        double sq = 0.0;
        grad.visit([&](const std::string &, const Mat<float> &g, bool) {
          sq += g.cast<double>().squaredNorm();
        });
        const double norm = std::sqrt(sq);
        if (norm > cfg.grad_clip) {
          const float scale = static_cast<float>(cfg.grad_clip / norm);
          grad.visit([&](const std::string &, Mat<float> &g, bool) {
            g *= scale;
          });
        }
      }
      st.lr = lr_at(res.optimizer.step - step0, total_steps, cfg);
      adamw_step(res.params, grad, res.optimizer, st.lr, cfg);
    }
    st.token_ce = ce_n > 0 ? ce_sum / static_cast<double>(ce_n) : 0.0;
    st.prop_mse = mse_n > 0 ? mse_sum / static_cast<double>(mse_n) : 0.0;
    st.wallclock = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
    res.log.push_back(st);
    if (on_epoch)
      on_epoch(st);
  }
  return res;
}

}  // namespace stgg
