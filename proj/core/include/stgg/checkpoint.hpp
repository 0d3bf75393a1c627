//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef STGG_CHECKPOINT_HPP_
#define STGG_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>

#include <nlohmann/json.hpp>

#include "stgg/model.hpp"
#include "stgg/properties.hpp"
#include "stgg/vocab.hpp"

namespace stgg {

/// AdamW moments, same shapes as the parameters.
struct OptimizerState {
  ModelParams<float> m, v;
  long step = 0;
};

struct Checkpoint {
  ModelConfig config;
  PropertySpec spec;
  std::uint64_t vocab_digest = 0;
  nlohmann::json run_config = nlohmann::json::object();
  ModelParams<float> params;
  std::optional<OptimizerState> optimizer;
};

/// Binary layout, little-endian:
///
///   8 bytes  magic "STGGCKPT"
///   u32      format version
///   u64      header length n
///   n bytes  JSON header {model, property_spec, vocab_digest, run_config,
///            tensors: [{name, rows, cols}], optimizer_step?}
///   float32  tensor data in header order, row-major; when optimizer_step
///            is present, first moments then second moments follow in the
///            same order.
inline constexpr int kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path &path, const Checkpoint &c);

/// Throws FormatError: kIo, kMalformed, kVersionMismatch, or kHashMismatch
/// when expected_vocab is given and its digest differs from the stored one.
Checkpoint load_checkpoint(const std::filesystem::path &path,
                           const Vocab *expected_vocab = nullptr);

}  // namespace stgg

#endif  // STGG_CHECKPOINT_HPP_
