//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <benchmark/benchmark.h>

#include "stgg/codec.hpp"
#include "stgg/dataset.hpp"
#include "stgg/mask_engine.hpp"
#include "stgg/model.hpp"
#include "stgg/molgraph.hpp"
#include "stgg/sampler.hpp"

namespace stgg {
namespace {

struct Fixture {
  Vocab seed_vocab = load_vocab(STGG_SEED_VOCAB);
  std::vector<MolGraph> graphs = generate_synthetic(seed_vocab, 256, 64, 1);
  Vocab vocab = induce_vocab(graphs);
};

const Fixture &fixture() {
  static const Fixture f;
  return f;
}

void BM_Mask(benchmark::State &state) {
  const Fixture &f = fixture();
  Rng rng(1);
  const TokenSeq seq = rollout_uniform(f.vocab, 64, rng);
  DecoderState s = init_state(f.vocab, 64);
  for (std::size_t i = 1; i + 1 < seq.size() / 2; ++i)
    advance_in_place(s, seq[i]);
  for (auto _: state)
    benchmark::DoNotOptimize(mask(s));
}
BENCHMARK(BM_Mask);

void BM_UniformRollout(benchmark::State &state) {
  const Fixture &f = fixture();
  Rng rng(2);
  for (auto _: state)
    benchmark::DoNotOptimize(rollout_uniform(f.vocab, 64, rng));
}
BENCHMARK(BM_UniformRollout);

void BM_Encode(benchmark::State &state) {
  const Fixture &f = fixture();
  std::size_t i = 0;
  for (auto _: state) {
    const MolGraph &g = f.graphs[i++ % f.graphs.size()];
    benchmark::DoNotOptimize(encode(g, f.vocab, Traversal::randomized(i)));
  }
}
BENCHMARK(BM_Encode);

void BM_Decode(benchmark::State &state) {
  const Fixture &f = fixture();
  std::vector<TokenSeq> seqs;
  for (const auto &g: f.graphs)
    seqs.push_back(encode(g, f.vocab, Traversal::canonical()));
  std::size_t i = 0;
  for (auto _: state)
    benchmark::DoNotOptimize(decode(seqs[i++ % seqs.size()], f.vocab));
}
BENCHMARK(BM_Decode);

void BM_CanonicalKey(benchmark::State &state) {
  const Fixture &f = fixture();
  std::size_t i = 0;
  for (auto _: state)
    benchmark::DoNotOptimize(canonical_key(f.graphs[i++ % f.graphs.size()]));
}
BENCHMARK(BM_CanonicalKey);

/// One incremental decoding step at half context, for d_model = range(0).
void BM_ForwardStep(benchmark::State &state) {
  const Fixture &f = fixture();
  const PropertySpec spec(
      { { "molWt", PropertyKind::kContinuous, 0, 100.0, 50.0 } });
  ModelConfig cfg = ModelConfig::for_vocab(f.vocab, spec, 128);
  cfg.d_model = static_cast<int>(state.range(0));
  cfg.n_heads = 4;
  cfg.n_layers = 3;
  Rng rng(3);
  const auto p = init_params<float>(cfg, rng);
  const TokenSeq seq = encode(f.graphs[0], f.vocab, Traversal::canonical());
  for (auto _: state) {
    state.PauseTiming();
    InferenceSession s(p, cfg, f.vocab, all_missing(spec));
    for (std::size_t i = 0; i + 1 < seq.size(); ++i)
      s.push(seq[i]);
    state.ResumeTiming();
    s.push(seq.back());
    benchmark::DoNotOptimize(s.logits().data());
  }
}
BENCHMARK(BM_ForwardStep)->Arg(64)->Arg(128);

void BM_SampleOne(benchmark::State &state) {
  const Fixture &f = fixture();
  const PropertySpec spec(
      { { "molWt", PropertyKind::kContinuous, 0, 100.0, 50.0 } });
  ModelConfig cfg = ModelConfig::for_vocab(f.vocab, spec, 96);
  Rng rng(4);
  const auto p = init_params<float>(cfg, rng);
  const Sampler s(p, cfg, f.vocab, spec);
  const PropertyVector target = standardize(spec, { 120.0 });
  for (auto _: state)
    benchmark::DoNotOptimize(s.sample_one(target, 1.5, 1.0, 96, rng));
}
BENCHMARK(BM_SampleOne);

}  // namespace
}  // namespace stgg

BENCHMARK_MAIN();
