//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef STGG_METRICS_HPP_
#define STGG_METRICS_HPP_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "stgg/molgraph.hpp"

namespace stgg {

/// A generated sample: a graph, or nullopt when it failed to decode.
using Sample = std::optional<MolGraph>;

/// Isomorphism classes keyed by canonical_key, with an exact isomorphism
/// check inside each key bucket.
class ReferenceSet {
 public:
  ReferenceSet() = default;
  explicit ReferenceSet(std::span<const MolGraph> graphs);

  /// Returns false when an isomorphic graph is already present.
  bool insert(const MolGraph &g);
  bool contains(const MolGraph &g) const;
  std::size_t size() const noexcept { return size_; }

 private:
  std::map<std::string, std::vector<MolGraph>> buckets_;
  std::size_t size_ = 0;
};

struct EfficiencyReport {
  int total = 0;
  int valid = 0;
  int unique = 0;  ///< distinct isomorphism classes among valid samples
  int novel = 0;   ///< valid samples absent from the reference set
  int efficient = 0;
  double validity = 0.0;    ///< valid / total
  double uniqueness = 0.0;  ///< unique / valid
  double uniqueness_total = 0.0;  ///< unique / total
  double novelty = 0.0;     ///< novel / valid
  double efficiency = 0.0;  ///< efficient / total

  nlohmann::json to_json() const;
};

/// A sample is efficient when it is valid, novel, and the first of its
/// isomorphism class in the list. Empty ratios are 0.
EfficiencyReport generative_efficiency(std::span<const Sample> samples,
                                       const ReferenceSet &train);

/// min |prop(sample) - target| over valid samples, +inf when there are none.
/// Throws ArgumentError for a property that is not graph-computable.
double min_mae(std::span<const Sample> samples, double target,
               std::string_view property);

/// 1 - mean pairwise Tanimoto similarity of circular fingerprints over the
/// valid samples. Throws ArgumentError with fewer than 2 valid samples.
double internal_diversity(std::span<const Sample> samples);

}  // namespace stgg

#endif  // STGG_METRICS_HPP_
