//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include "fixtures.hpp"
#include "stgg/dataset.hpp"
#include "stgg/error.hpp"
#include "stgg/fingerprint.hpp"
#include "stgg/metrics.hpp"
#include "stgg/smiles.hpp"

namespace stgg {
namespace {

Sample mol(const char *s) { return parse_smiles(s); }

MolGraph shuffled(const MolGraph &g, std::uint64_t seed) {
  std::vector<int> perm(g.atom_count());
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  return permute_atoms(g, perm);
}

TEST(ReferenceSet, InsertAndContains) {
  ReferenceSet r;
  EXPECT_TRUE(r.insert(parse_smiles("CCO")));
  EXPECT_FALSE(r.insert(parse_smiles("OCC")));
  EXPECT_TRUE(r.insert(parse_smiles("COC")));
  EXPECT_EQ(r.size(), 2u);
  EXPECT_TRUE(r.contains(shuffled(parse_smiles("CCO"), 3)));
  EXPECT_FALSE(r.contains(parse_smiles("CCN")));
}

TEST(Efficiency, HandCounted) {
  const ReferenceSet train(testing::parse_all({ "CCO", "C1CCCCC1" }));
  const std::vector<Sample> s = { mol("OCC"),  std::nullopt, mol("CCN"),
                                  mol("NCC"),  mol("C1CCCCC1"), mol("COC"),
                                  std::nullopt, mol("CCN") };
  const EfficiencyReport r = generative_efficiency(s, train);
  EXPECT_EQ(r.total, 8);
  EXPECT_EQ(r.valid, 6);
  EXPECT_EQ(r.unique, 4);  // CCO, CCN, C1CCCCC1, COC
  EXPECT_EQ(r.novel, 4);   // CCN x3, COC
  EXPECT_EQ(r.efficient, 2);
  EXPECT_DOUBLE_EQ(r.validity, 0.75);
  EXPECT_DOUBLE_EQ(r.uniqueness, 4.0 / 6.0);
  EXPECT_DOUBLE_EQ(r.uniqueness_total, 0.5);
  EXPECT_DOUBLE_EQ(r.novelty, 4.0 / 6.0);
  EXPECT_DOUBLE_EQ(r.efficiency, 0.25);
  const auto j = r.to_json();
  EXPECT_EQ(j.at("counts").at("efficient"), 2);
  EXPECT_EQ(j.at("uniqueness_over_total"), 0.5);

  const EfficiencyReport empty = generative_efficiency({}, train);
  EXPECT_EQ(empty.total, 0);
  EXPECT_EQ(empty.efficiency, 0.0);
}

TEST(Efficiency, MatchesPairwiseOracle) {
  const Vocab seed = testing::seed_vocab();
  const auto pool = generate_synthetic(seed, 300, 9, 5);
  const std::vector<MolGraph> train_graphs(pool.begin(), pool.begin() + 100);
  std::vector<Sample> samples;
  Rng rng(8);
  for (int i = 0; i < 400; ++i) {
    if (i % 13 == 0) {
      samples.push_back(std::nullopt);
      continue;
    }
    const auto &g = pool[std::uniform_int_distribution<int>(0, 299)(rng)];
    samples.push_back(shuffled(g, rng()));
  }
  const EfficiencyReport r =
      generative_efficiency(samples, ReferenceSet(train_graphs));

  // Oracle: quadratic scan with the exact isomorphism test only.
  int valid = 0, unique = 0, novel = 0, efficient = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!samples[i])
      continue;
    ++valid;
    bool first = true;
    for (std::size_t j = 0; j < i && first; ++j)
      first = !(samples[j] && is_isomorphic(*samples[i], *samples[j]));
    bool in_train = false;
    for (const auto &t: train_graphs)
      in_train = in_train || is_isomorphic(*samples[i], t);
    unique += first;
    novel += !in_train;
    efficient += first && !in_train;
  }
  EXPECT_EQ(r.valid, valid);
  EXPECT_EQ(r.unique, unique);
  EXPECT_EQ(r.novel, novel);
  EXPECT_EQ(r.efficient, efficient);
  EXPECT_GT(efficient, 0);
  EXPECT_LT(efficient, valid);
}

TEST(MinMae, Values) {
  const std::vector<Sample> s = { mol("O"), std::nullopt, mol("CC(=O)O") };
  EXPECT_NEAR(min_mae(s, 20.0, "molWt"), 20.0 - molecular_weight(*s[0]), 1e-12);
  EXPECT_NEAR(min_mae(s, 60.0, "molWt"), std::abs(60.0 - molecular_weight(*s[2])),
              1e-12);
  EXPECT_EQ(min_mae(s, 3.0, "heavy_atom_count"), 1.0);
  const std::vector<Sample> none = { std::nullopt };
  EXPECT_EQ(min_mae(none, 1.0, "molWt"), std::numeric_limits<double>::infinity());
  EXPECT_THROW(min_mae(s, 1.0, "logP"), ArgumentError);
}

TEST(Diversity, MatchesPairwiseOracle) {
  const std::vector<Sample> s = { mol("CCO"), std::nullopt, mol("C1=CC=CC=C1"),
                                  mol("CC(=O)N"), mol("C1CC1"), mol("CCO") };
  std::vector<Fingerprint> fp;
  for (const auto &x: s)
    if (x)
      fp.push_back(circular_fingerprint(*x));
  double sum = 0.0;
  int pairs = 0;
  for (std::size_t i = 0; i < fp.size(); ++i)
    for (std::size_t j = i + 1; j < fp.size(); ++j, ++pairs)
      sum += tanimoto(fp[i], fp[j]);
  EXPECT_NEAR(internal_diversity(s), 1.0 - sum / pairs, 1e-12);

  const std::vector<Sample> same = { mol("CCO"), mol("OCC") };
  EXPECT_NEAR(internal_diversity(same), 0.0, 1e-12);
  const std::vector<Sample> one = { mol("CCO"), std::nullopt };
  EXPECT_THROW(internal_diversity(one), ArgumentError);
}

}  // namespace
}  // namespace stgg
