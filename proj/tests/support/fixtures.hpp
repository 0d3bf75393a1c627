//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef STGG_TESTS_FIXTURES_HPP_
#define STGG_TESTS_FIXTURES_HPP_

#include <string>
#include <vector>

#include "stgg/codec.hpp"
#include "stgg/model.hpp"
#include "stgg/molgraph.hpp"
#include "stgg/properties.hpp"
#include "stgg/smiles.hpp"
#include "stgg/vocab.hpp"

namespace stgg::testing {

/// Small kekulized molecules with rings, branches, charges and a salt.
inline const std::vector<std::string> &small_smiles() {
  static const std::vector<std::string> s = {
    "C1CCCCC1",         "CC(=O)O",        "C1=CC=CC=C1O",   "N#CC(C)(C)O",
    "[Na+].[Cl-]",      "C1CC2CCC1C2",    "OC(=O)C1CN1",    "C=CC#N",
    "[NH4+].[O-]C=O",   "C1CC1C(F)(F)F",  "CC1(C)CC2(CC2)C1", "O=C1NC(=O)C=C1",
  };
  return s;
}

inline std::vector<MolGraph> parse_all(const std::vector<std::string> &smiles) {
  std::vector<MolGraph> out;
  for (const auto &s: smiles)
    out.push_back(parse_smiles(s));
  return out;
}

/// Two continuous properties and one 3-way categorical.
inline PropertySpec toy_spec() {
  return PropertySpec({ { "a", PropertyKind::kContinuous, 0, 1.0, 2.0 },
                        { "b", PropertyKind::kContinuous, 0, -3.0, 0.5 },
                        { "c", PropertyKind::kCategorical, 3, 0.0, 1.0 } });
}

/// Examples over the given graphs with a mix of present and missing
/// conditioning entries.
inline std::vector<Example> toy_examples(const std::vector<MolGraph> &graphs,
                                         const Vocab &v,
                                         const PropertySpec &spec,
                                         std::uint64_t seed) {
  std::vector<Example> ex;
  Rng rng(seed);
  std::normal_distribution<double> z;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    Example e;
    e.tokens = encode(graphs[i], v, Traversal::randomized(rng()));
    RawProperties raw = { 1.0 + 2.0 * z(rng), -3.0 + 0.5 * z(rng),
                          static_cast<double>(i % 3) };
    if (i % 4 == 3)
      raw[1].reset();
    e.target = standardize(spec, raw);
    e.cond = mask_properties(e.target, static_cast<int>(i % 4), rng);
    ex.push_back(std::move(e));
  }
  return ex;
}

/// Hand-specified valencies for synthetic corpora.
inline Vocab seed_vocab(int r_max = Vocab::kDefaultRMax) {
  return Vocab({ { "C", 0, 0, 4 },
                 { "C", 0, 1, 3 },
                 { "C", 0, 2, 2 },
                 { "C", 0, 3, 1 },
                 { "N", 0, 0, 3 },
                 { "N", 0, 1, 2 },
                 { "N", 0, 2, 1 },
                 { "O", 0, 0, 2 },
                 { "O", 0, 1, 1 },
                 { "F", 0, 0, 1 } },
               r_max);
}

}  // namespace stgg::testing

#endif  // STGG_TESTS_FIXTURES_HPP_
