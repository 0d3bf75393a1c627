//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef STGG_CLI_COMMANDS_HPP_
#define STGG_CLI_COMMANDS_HPP_

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace stgg::cli {

/// What every command receives besides its own options.
struct Context {
  std::uint64_t seed = 0;
  nlohmann::json run_config;  ///< resolved command line, echoed into outputs
  std::ostream *out = nullptr;
  std::ostream *err = nullptr;
};

struct BuildVocabOptions {
  std::string data, props, out = "vocab.json", spec_out;
  std::vector<std::string> columns, categorical;
  int r_max = 100;
  double max_failure_rate = 0.01;
  bool no_standardize = false;
};

struct GenSynthOptions {
  std::string vocab, out, props_out;
  int n = 10000;
  int max_len = 64;
};

struct TrainOptions {
  std::string data, props, vocab, spec, out = "model.ckpt", log, resume;
  std::vector<std::string> columns, categorical;
  int epochs = 20;
  int batch_size = 32;
  double lr = 1e-3;
  double weight_decay = 0.1;
  int warmup = 0;
  double grad_clip = 0.0;
  double lambda_prop = 1.0;
  int d_model = 64;
  int layers = 3;
  int heads = 4;
  int max_len = 0;
  double max_failure_rate = 0.01;
  bool legacy_arch = false;
  bool no_random_order = false;
  bool no_standardize = false;
  bool no_prop_loss = false;
  bool single_layer_prop_encoder = false;
};

struct SampleOptions {
  std::string model, vocab, out;
  std::vector<std::string> targets;
  int n = 100;
  double w = 1.5;
  std::vector<double> w_uniform;
  int k = 5;
  double temperature = 1.0;
  int max_len = 0;
  int threads = 1;
};

struct EvaluateOptions {
  std::string samples, train, out;
  std::vector<std::string> targets;
};

struct PredictOptions {
  std::string model, vocab, data, out;
};

struct EncodeOptions {
  std::string vocab, data;
  std::vector<std::string> smiles;
  bool random_order = false;
};

struct DecodeOptions {
  std::string vocab, data;
  std::vector<std::string> sequences;
};

struct RoundtripOptions {
  std::string vocab, data;
  int seeds = 20;
};

int build_vocab(const BuildVocabOptions &o, const Context &c);
int gen_synth(const GenSynthOptions &o, const Context &c);
int train(const TrainOptions &o, const Context &c);
int sample(const SampleOptions &o, const Context &c);
int evaluate(const EvaluateOptions &o, const Context &c);
int predict(const PredictOptions &o, const Context &c);
int encode(const EncodeOptions &o, const Context &c);
int decode(const DecodeOptions &o, const Context &c);
int roundtrip_check(const RoundtripOptions &o, const Context &c);

}  // namespace stgg::cli

#endif  // STGG_CLI_COMMANDS_HPP_
