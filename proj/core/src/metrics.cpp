//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "stgg/metrics.hpp"

#include <cmath>
#include <limits>

#include "stgg/error.hpp"
#include "stgg/fingerprint.hpp"
#include "stgg/properties.hpp"

namespace stgg {

ReferenceSet::ReferenceSet(std::span<const MolGraph> graphs) {
  for (const auto &g: graphs)
    insert(g);
}

bool ReferenceSet::insert(const MolGraph &g) {
  auto &bucket = buckets_[canonical_key(g)];
  for (const auto &h: bucket)
    if (is_isomorphic(g, h))
      return false;
  bucket.push_back(g);
  ++size_;
  return true;
}

bool ReferenceSet::contains(const MolGraph &g) const {
  const auto it = buckets_.find(canonical_key(g));
  if (it == buckets_.end())
    return false;
  for (const auto &h: it->second)
    if (is_isomorphic(g, h))
      return true;
  return false;
}

nlohmann::json EfficiencyReport::to_json() const {
  return { { "counts",
             { { "total", total },
               { "valid", valid },
               { "unique", unique },
               { "novel", novel },
               { "efficient", efficient } } },
           { "validity", validity },
           { "uniqueness", uniqueness },
           { "uniqueness_over_total", uniqueness_total },
           { "novelty", novelty },
           { "efficiency", efficiency } };
}

EfficiencyReport generative_efficiency(std::span<const Sample> samples,
                                       const ReferenceSet &train) {
  EfficiencyReport r;
  r.total = static_cast<int>(samples.size());
  ReferenceSet seen;
  for (const auto &s: samples) {
    if (!s)
      continue;
    ++r.valid;
    const bool first = seen.insert(*s);
    const bool novel = !train.contains(*s);
    r.unique += first;
    r.novel += novel;
    r.efficient += first && novel;
  }
  auto ratio = [](int a, int b) {
    return b > 0 ? static_cast<double>(a) / static_cast<double>(b) : 0.0;
  };
  r.validity = ratio(r.valid, r.total);
  r.uniqueness = ratio(r.unique, r.valid);
  r.uniqueness_total = ratio(r.unique, r.total);
  r.novelty = ratio(r.novel, r.valid);
  r.efficiency = ratio(r.efficient, r.total);
  return r;
}

double min_mae(std::span<const Sample> samples, double target,
               std::string_view property) {
  if (!is_surrogate_property(property))
    throw ArgumentError("property '" + std::string(property) +
                        "' is not computable from a graph");
  double best = std::numeric_limits<double>::infinity();
  for (const auto &s: samples)
    if (s)
      best = std::min(best, std::abs(surrogate_property(property, *s) - target));
  return best;
}

double internal_diversity(std::span<const Sample> samples) {
  std::vector<Fingerprint> fps;
  for (const auto &s: samples)
    if (s)
      fps.push_back(circular_fingerprint(*s));
  if (fps.size() < 2)
    throw ArgumentError("internal diversity needs at least 2 valid samples");
  // Row sums first, then the total, so the reduction order is fixed.
  double sum = 0.0;
  for (std::size_t i = 0; i < fps.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = i + 1; j < fps.size(); ++j)
      row += tanimoto(fps[i], fps[j]);
    sum += row;
  }
  const double pairs =
      static_cast<double>(fps.size()) * static_cast<double>(fps.size() - 1) /
      2.0;
  return 1.0 - sum / pairs;
}

}  // namespace stgg
