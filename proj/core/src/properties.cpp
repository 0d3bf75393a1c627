//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "stgg/properties.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "stgg/error.hpp"

namespace stgg {

PropertySpec::PropertySpec(std::vector<PropertyDef> defs, bool standardize)
    : defs_(std::move(defs)), standardize_(standardize) {
  std::set<std::string> names;
  for (int i = 0; i < size(); ++i) {
    const PropertyDef &d = defs_[i];
    if (d.name.empty() || !names.insert(d.name).second)
      throw ArgumentError("duplicate or empty property name '" + d.name + "'");
    if (d.kind == PropertyKind::kContinuous) {
      if (!(d.std > 0.0) || !std::isfinite(d.std) || !std::isfinite(d.mean))
        throw ArgumentError("property " + d.name + " needs finite std > 0");
      cont_idx_.push_back(i);
    } else {
      if (d.cardinality < 1)
        throw ArgumentError("property " + d.name + " needs cardinality >= 1");
      cat_idx_.push_back(i);
    }
  }
  n_cont_ = static_cast<int>(cont_idx_.size());
}

std::vector<int> PropertySpec::cardinalities() const {
  std::vector<int> out;
  for (int i: cat_idx_)
    out.push_back(defs_[i].cardinality);
  return out;
}

std::optional<int> PropertySpec::find(std::string_view name) const {
  for (int i = 0; i < size(); ++i)
    if (defs_[i].name == name)
      return i;
  return std::nullopt;
}

PropertySpec PropertySpec::fit(std::vector<PropertyDef> defs,
                               std::span<const RawProperties> rows,
                               bool standardize) {
  for (std::size_t i = 0; i < defs.size(); ++i) {
    PropertyDef &d = defs[i];
    if (d.kind != PropertyKind::kContinuous)
      continue;
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto &r: rows)
      if (i < r.size() && r[i]) {
        sum += *r[i];
        ++n;
      }
    const double mean = n > 0 ? sum / static_cast<double>(n) : 0.0;
    double ss = 0.0;
    for (const auto &r: rows)
      if (i < r.size() && r[i])
        ss += (*r[i] - mean) * (*r[i] - mean);
    const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    d.mean = mean;
    d.std = sd > 0.0 && std::isfinite(sd) ? sd : 1.0;
  }
  return PropertySpec(std::move(defs), standardize);
}

nlohmann::json PropertySpec::to_json() const {
  nlohmann::json props = nlohmann::json::array();
  for (const auto &d: defs_) {
    nlohmann::json p = { { "name", d.name } };
    if (d.kind == PropertyKind::kContinuous) {
      p["kind"] = "continuous";
      p["mean"] = d.mean;
      p["std"] = d.std;
    } else {
      p["kind"] = "categorical";
      p["cardinality"] = d.cardinality;
    }
    props.push_back(std::move(p));
  }
  return { { "format", "stgg-property-spec" },
           { "version", kFormatVersion },
           { "standardize", standardize_ },
           { "properties", props } };
}

PropertySpec PropertySpec::from_json(const nlohmann::json &j) {
  try {
    if (!j.is_object() || j.value("format", "") != "stgg-property-spec")
      throw FormatError(FormatErrorKind::kMalformed, "not a property spec");
    if (j.at("version").get<int>() != kFormatVersion)
      throw FormatError(FormatErrorKind::kVersionMismatch,
                        "unsupported property spec version");
    std::vector<PropertyDef> defs;
    for (const auto &p: j.at("properties")) {
      PropertyDef d;
      d.name = p.at("name").get<std::string>();
      const std::string kind = p.at("kind").get<std::string>();
      if (kind == "continuous") {
        d.mean = p.at("mean").get<double>();
        d.std = p.at("std").get<double>();
      } else if (kind == "categorical") {
        d.kind = PropertyKind::kCategorical;
        d.cardinality = p.at("cardinality").get<int>();
      } else {
        throw FormatError(FormatErrorKind::kMalformed,
                          "unknown property kind " + kind);
      }
      defs.push_back(std::move(d));
    }
    return PropertySpec(std::move(defs), j.value("standardize", true));
  } catch (const nlohmann::json::exception &e) {
    throw FormatError(FormatErrorKind::kMalformed,
                      std::string("malformed property spec: ") + e.what());
  } catch (const ArgumentError &e) {
    throw FormatError(FormatErrorKind::kMalformed,
                      std::string("invalid property spec: ") + e.what());
  }
}

std::uint64_t PropertySpec::digest() const {
  return fnv1a64(to_json().dump());
}

void save_property_spec(const PropertySpec &s, const std::filesystem::path &p) {
  std::ofstream out(p);
  if (!out)
    throw FormatError(FormatErrorKind::kIo, "cannot write " + p.string());
  out << s.to_json().dump(2) << '\n';
}

PropertySpec load_property_spec(const std::filesystem::path &p) {
  std::ifstream in(p);
  if (!in)
    throw FormatError(FormatErrorKind::kIo, "cannot open " + p.string());
  try {
    return PropertySpec::from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception &e) {
    throw FormatError(FormatErrorKind::kMalformed, p.string() + ": " + e.what());
  }
}

PropertyVector standardize(const PropertySpec &spec, const RawProperties &raw) {
  if (static_cast<int>(raw.size()) != spec.size())
    throw ArgumentError("expected " + std::to_string(spec.size()) +
                        " property values, got " + std::to_string(raw.size()));
  PropertyVector pv = all_missing(spec);
  for (int i = 0; i < spec.continuous_count(); ++i) {
    const int k = spec.continuous_index(i);
    if (!raw[k])
      continue;
    const PropertyDef &d = spec.defs()[k];
    pv.value[i] = spec.standardizes() ? (*raw[k] - d.mean) / d.std : *raw[k];
    pv.missing[i] = 0;
  }
  for (int i = 0; i < spec.categorical_count(); ++i) {
    const int k = spec.categorical_index(i);
    if (!raw[k])
      continue;
    const double x = *raw[k];
    const int c = static_cast<int>(x);
    if (c != x || c < 0 || c >= spec.defs()[k].cardinality)
      throw ArgumentError("category " + std::to_string(x) + " invalid for " +
                          spec.defs()[k].name);
    pv.category[i] = c;
  }
  return pv;
}

RawProperties destandardize(const PropertySpec &spec,
                            const PropertyVector &pv) {
  if (static_cast<int>(pv.value.size()) != spec.continuous_count() ||
      static_cast<int>(pv.category.size()) != spec.categorical_count())
    throw ArgumentError("property vector does not match spec");
  RawProperties raw(spec.size());
  for (int i = 0; i < spec.continuous_count(); ++i) {
    if (pv.missing[i])
      continue;
    const PropertyDef &d = spec.defs()[spec.continuous_index(i)];
    raw[spec.continuous_index(i)] =
        spec.standardizes() ? pv.value[i] * d.std + d.mean : pv.value[i];
  }
  for (int i = 0; i < spec.categorical_count(); ++i)
    if (pv.category[i] != PropertyVector::kMissing)
      raw[spec.categorical_index(i)] = pv.category[i];
  return raw;
}

PropertyVector all_missing(const PropertySpec &spec) {
  PropertyVector pv;
  pv.value.assign(spec.continuous_count(), 0.0);
  pv.missing.assign(spec.continuous_count(), 1);
  pv.category.assign(spec.categorical_count(), PropertyVector::kMissing);
  return pv;
}

bool is_all_missing(const PropertyVector &pv) {
  return present_count(pv) == 0;
}

int present_count(const PropertyVector &pv) {
  int n = 0;
  for (auto m: pv.missing)
    n += m == 0;
  for (int c: pv.category)
    n += c != PropertyVector::kMissing;
  return n;
}

int sample_mask_count(int total, Rng &rng) {
  if (total < 0)
    throw ArgumentError("property count must be non-negative");
  return std::uniform_int_distribution<int>(0, total)(rng);
}

PropertyVector mask_properties(const PropertyVector &pv, int t, Rng &rng) {
  const int n_cont = static_cast<int>(pv.value.size());
  const int total = n_cont + static_cast<int>(pv.category.size());
  if (t < 0 || t > total)
    throw ArgumentError("mask count out of range");
  std::vector<int> idx(total);
  std::iota(idx.begin(), idx.end(), 0);
  // Partial Fisher-Yates: the first t entries are a uniform t-subset.
  for (int i = 0; i < t; ++i) {
    std::uniform_int_distribution<int> pick(i, total - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  PropertyVector out = pv;
  for (int i = 0; i < t; ++i) {
    const int k = idx[i];
    if (k < n_cont) {
      out.value[k] = 0.0;
      out.missing[k] = 1;
    } else {
      out.category[k - n_cont] = PropertyVector::kMissing;
    }
  }
  return out;
}

bool is_surrogate_property(std::string_view name) noexcept {
  return std::find(std::begin(kSurrogateProperties),
                   std::end(kSurrogateProperties),
                   name) != std::end(kSurrogateProperties);
}

double surrogate_property(std::string_view name, const MolGraph &g) {
  if (name == "molWt")
    return molecular_weight(g);
  if (name == "ring_count")
    return ring_count(g);
  if (name == "heavy_atom_count")
    return heavy_atom_count(g);
  throw ArgumentError("unknown property '" + std::string(name) + "'");
}

}  // namespace stgg
