//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef STGG_PROPERTIES_HPP_
#define STGG_PROPERTIES_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "stgg/hash.hpp"
#include "stgg/molgraph.hpp"

namespace stgg {

enum class PropertyKind { kContinuous, kCategorical };

struct PropertyDef {
  std::string name;
  PropertyKind kind = PropertyKind::kContinuous;
  int cardinality = 0;  ///< categorical only
  double mean = 0.0;    ///< continuous only, from the train split
  double std = 1.0;

  friend bool operator==(const PropertyDef &, const PropertyDef &) = default;
};

/// Raw values in spec order; categorical values hold the category id.
using RawProperties = std::vector<std::optional<double>>;

/// Conditioning vector. Continuous entries are z-scores with a missing flag
/// (missing implies value 0); categorical entries are ids or kMissing.
struct PropertyVector {
  static constexpr int kMissing = -1;

  std::vector<double> value;
  std::vector<std::uint8_t> missing;
  std::vector<int> category;

  friend bool operator==(const PropertyVector &,
                         const PropertyVector &) = default;
};

/// Ordered property declarations with standardization statistics.
class PropertySpec {
 public:
  static constexpr int kFormatVersion = 1;

  PropertySpec() = default;
  /// Throws ArgumentError on duplicate names, non-positive std or
  /// categorical cardinality < 1.
  explicit PropertySpec(std::vector<PropertyDef> defs,
                        bool standardize = true);

  std::span<const PropertyDef> defs() const noexcept { return defs_; }
  int size() const noexcept { return static_cast<int>(defs_.size()); }
  bool empty() const noexcept { return defs_.empty(); }
  int continuous_count() const noexcept { return n_cont_; }
  int categorical_count() const noexcept { return size() - n_cont_; }
  /// Cardinalities of the categorical properties, in spec order.
  std::vector<int> cardinalities() const;
  /// Index into defs() of the i-th continuous / categorical property.
  int continuous_index(int i) const { return cont_idx_.at(i); }
  int categorical_index(int i) const { return cat_idx_.at(i); }
  std::optional<int> find(std::string_view name) const;

  /// False when the property spec was built with standardization disabled; z-scores
  /// are then the raw values.
  bool standardizes() const noexcept { return standardize_; }

  /// Spec with mean/std fitted on the given rows (train split). Zero or
  /// undefined spread falls back to std 1.
  static PropertySpec fit(std::vector<PropertyDef> defs,
                          std::span<const RawProperties> rows,
                          bool standardize = true);

  nlohmann::json to_json() const;
  static PropertySpec from_json(const nlohmann::json &j);
  std::uint64_t digest() const;

  friend bool operator==(const PropertySpec &,
                         const PropertySpec &) = default;

 private:
  std::vector<PropertyDef> defs_;
  bool standardize_ = true;
  int n_cont_ = 0;
  std::vector<int> cont_idx_;
  std::vector<int> cat_idx_;
};

void save_property_spec(const PropertySpec &s, const std::filesystem::path &p);
PropertySpec load_property_spec(const std::filesystem::path &p);

/// z = (x - mean) / std. Throws ArgumentError on a length mismatch or a
/// categorical id outside [0, cardinality).
PropertyVector standardize(const PropertySpec &spec, const RawProperties &raw);
RawProperties destandardize(const PropertySpec &spec, const PropertyVector &pv);

PropertyVector all_missing(const PropertySpec &spec);
bool is_all_missing(const PropertyVector &pv);
/// Number of present (non-missing) entries.
int present_count(const PropertyVector &pv);

/// Uniform on {0, ..., total}.
int sample_mask_count(int total, Rng &rng);

/// Sets t distinct properties, chosen uniformly, to missing. Properties that
/// are already missing can be chosen. Throws ArgumentError unless
/// 0 <= t <= property count.
PropertyVector mask_properties(const PropertyVector &pv, int t, Rng &rng);

/// Graph-computable properties: "molWt", "ring_count", "heavy_atom_count".
inline constexpr std::string_view kSurrogateProperties[] = {
  "molWt", "ring_count", "heavy_atom_count"
};
/// Throws ArgumentError for an unknown name.
double surrogate_property(std::string_view name, const MolGraph &g);
bool is_surrogate_property(std::string_view name) noexcept;

}  // namespace stgg

#endif  // STGG_PROPERTIES_HPP_
