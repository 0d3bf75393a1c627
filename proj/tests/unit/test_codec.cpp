//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <set>

#include "fixtures.hpp"
#include "stgg/codec.hpp"
#include "stgg/dataset.hpp"

namespace stgg {
namespace {

Vocab fixture_vocab() {
  return induce_vocab(testing::parse_all(testing::small_smiles()));
}

TEST(Codec, Methane) {
  const std::vector<MolGraph> c = { parse_smiles("C") };
  const Vocab v = induce_vocab(c);
  const TokenSeq t = encode(c[0], v);
  EXPECT_EQ(to_text(t, v), "<bos> CH4 <eos>");
  EXPECT_TRUE(is_isomorphic(decode(t, v), c[0]));
}

TEST(Codec, Salt) {
  const std::vector<MolGraph> c = { parse_smiles("[Na+].[Cl-]") };
  const Vocab v = induce_vocab(c);
  EXPECT_EQ(to_text(encode(c[0], v), v), "<bos> Na+ . Cl- <eos>");
}

TEST(Codec, CyclohexaneCanonical) {
  const std::vector<MolGraph> c = { parse_smiles("C1CCCCC1") };
  const Vocab v = induce_vocab(c);
  EXPECT_EQ(to_text(encode(c[0], v), v),
            "<bos> CH2 [bor] - CH2 - CH2 - CH2 - CH2 - CH2 - [eor-1] <eos>");
}

TEST(Codec, BranchesAndClosuresOrder) {
  // Atom 1 has two children; the first goes into a branch.
  const std::vector<MolGraph> c = { parse_smiles("CC(=O)O") };
  const Vocab v = induce_vocab(c);
  EXPECT_EQ(to_text(encode(c[0], v), v), "<bos> CH3 - C ( = O ) - OH <eos>");
}

TEST(Codec, DecodeIsInverseOnFixtures) {
  const Vocab v = fixture_vocab();
  for (const auto &s: testing::small_smiles()) {
    const MolGraph g = parse_smiles(s);
    EXPECT_TRUE(is_isomorphic(decode(encode(g, v), v), g)) << s;
    for (std::uint64_t seed = 0; seed < 20; ++seed)
      EXPECT_TRUE(
          is_isomorphic(decode(encode(g, v, Traversal::randomized(seed)), v), g))
          << s << " seed " << seed;
  }
}

TEST(Codec, RoundTripSynthetic) {
  const Vocab v = testing::seed_vocab();
  const auto graphs = generate_synthetic(v, 300, 64, 41);
  for (const auto &g: graphs)
    for (std::uint64_t seed = 0; seed < 20; ++seed)
      ASSERT_TRUE(
          is_isomorphic(decode(encode(g, v, Traversal::randomized(seed)), v), g));
}

TEST(Codec, DeterministicPerSeed) {
  const Vocab v = fixture_vocab();
  const MolGraph g = parse_smiles("CC1(C)CC2(CC2)C1");
  EXPECT_EQ(encode(g, v, Traversal::randomized(7)),
            encode(g, v, Traversal::randomized(7)));
  std::set<TokenSeq> distinct;
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    distinct.insert(encode(g, v, Traversal::randomized(seed)));
  EXPECT_GT(distinct.size(), 1u);
}

TEST(Codec, RandomOrderShufflesComponents) {
  const std::vector<MolGraph> c = { parse_smiles("[Na+].[Cl-]") };
  const Vocab v = induce_vocab(c);
  std::set<std::string> seen;
  for (std::uint64_t seed = 0; seed < 32; ++seed)
    seen.insert(to_text(encode(c[0], v, Traversal::randomized(seed)), v));
  EXPECT_EQ(seen.size(), 2u);
}

TEST(Codec, LengthBound) {
  const Vocab v = fixture_vocab();
  for (const auto &s: testing::small_smiles()) {
    const MolGraph g = parse_smiles(s);
    const int bound = 2 * g.atom_count() + 2 * g.bond_count() +
                      connected_components(g) + 2;
    for (std::uint64_t seed = 0; seed < 10; ++seed)
      EXPECT_LE(static_cast<int>(encode(g, v, Traversal::randomized(seed)).size()),
                bound)
          << s;
  }
}

TEST(Codec, EncodeErrors) {
  const std::vector<MolGraph> c = { parse_smiles("CC") };
  const Vocab v = induce_vocab(c);
  EXPECT_THROW(encode(parse_smiles("CO"), v), EncodeError);
  // Two simultaneously open anchors with r_max 1.
  const std::vector<MolGraph> bic = { parse_smiles("C1CC2CCC1C2") };
  const Vocab small = induce_vocab(bic, 1);
  EXPECT_THROW(encode(bic[0], small), EncodeError);
}

TEST(Codec, DecodeErrors) {
  const Vocab v = fixture_vocab();
  auto pos = [&](const std::string &text) -> long {
    try {
      decode(from_text(text, v), v);
    } catch (const DecodeError &e) {
      return static_cast<long>(e.position());
    }
    return -1;
  };
  EXPECT_EQ(pos("<bos> CH2 [bor] - CH2 - [eor-2] <eos>"), 6);
  EXPECT_EQ(pos("<bos> CH3 CH3 <eos>"), 2);
  EXPECT_EQ(pos("<bos> CH3 - CH3"), 4);
  EXPECT_EQ(pos("CH3 <eos>"), 0);
  EXPECT_EQ(pos("<bos> CH2 [bor] - CH2 <eos>"), 5);
  EXPECT_EQ(pos("<bos> CH3 ) <eos>"), 2);
  EXPECT_EQ(pos("<bos> C ( - CH3 <eos>"), 5);
  EXPECT_EQ(pos("<bos> CH2 [bor] - [eor-1] <eos>"), 4);
  EXPECT_THROW(from_text("<bos> Xx <eos>", v), DecodeError);
}

TEST(Codec, AnchorTrack) {
  const std::vector<MolGraph> c = { parse_smiles("C1CCCCC1") };
  const Vocab v = induce_vocab(c);
  const TokenSeq t = encode(c[0], v);
  const AnchorTrack track(t, v);
  ASSERT_EQ(track.size(), t.size());
  EXPECT_EQ(track.open_count(0), 0);
  EXPECT_EQ(track.open_count(2), 1);
  ASSERT_EQ(track.anchor_positions(2).size(), 1u);
  EXPECT_EQ(track.anchor_positions(2)[0], 2);
  EXPECT_EQ(track.open_count(t.size() - 2), 0);

  AnchorTrack inc;
  for (int id: t)
    inc.push(id, v);
  for (std::size_t i = 0; i < t.size(); ++i)
    EXPECT_EQ(inc.open_count(i), track.open_count(i));
}

}  // namespace
}  // namespace stgg
