//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "stgg/codec.hpp"
#include "stgg/dataset.hpp"
#include "stgg/error.hpp"
#include "stgg/smiles.hpp"

namespace stgg {
namespace {

namespace fs = std::filesystem;

class DatasetTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           (std::string("stgg_ds_") +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string &name, const std::string &text) {
    std::ofstream(dir_ / name) << text;
    return dir_ / name;
  }

  fs::path dir_;
};

// Reference FNV-1a, 64-bit.
std::uint64_t fnv_oracle(const std::string &s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c: s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

TEST_F(DatasetTest, CsvRoundTrip) {
  PropertyTable t;
  t.columns = { "a", "b", "c" };
  t.rows = { { 0.1, std::nullopt, 1e-300 },
             { -2.5, 3.0, 123456789.125 },
             { std::nullopt, std::nullopt, 0.0 } };
  write_property_csv(dir_ / "p.csv", t);
  const PropertyTable r = read_property_csv(dir_ / "p.csv");
  EXPECT_EQ(r.columns, t.columns);
  EXPECT_EQ(r.rows, t.rows);
  std::ifstream in(dir_ / "p.csv");
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  EXPECT_EQ(first, "0.1,,1e-300");
}

TEST_F(DatasetTest, CsvErrorsNameRowAndColumn) {
  const auto p = write("bad.csv", "x,y\n1,2\n3,abc\n");
  try {
    read_property_csv(p);
    FAIL();
  } catch (const DataError &e) {
    const std::string m = e.what();
    EXPECT_NE(m.find("row 2"), std::string::npos) << m;
    EXPECT_NE(m.find("'y'"), std::string::npos) << m;
    EXPECT_NE(m.find("'abc'"), std::string::npos) << m;
  }
  EXPECT_THROW(read_property_csv(write("ragged.csv", "x,y\n1\n")), DataError);
  EXPECT_THROW(read_property_csv(write("empty.csv", "")), DataError);
  EXPECT_THROW(read_property_csv(dir_ / "nope.csv"), FormatError);
}

TEST_F(DatasetTest, LoadCorpusWithPropertiesAndSurrogates) {
  const auto smi = write("c.smi", "CCO\nC1CC1\nnot_a_smiles(\nCC(=O)O\n");
  PropertyTable t;
  t.columns = { "y", "z" };
  t.rows = { { 1.0, 2.0 }, { std::nullopt, 4.0 }, { 5.0, 6.0 }, { 7.0, 8.0 } };
  const std::vector<std::string> cols = { "z", "ring_count", "y" };
  const LoadedCorpus c = load_corpus(smi, &t, cols, 0.5);
  ASSERT_EQ(c.records.size(), 3u);
  ASSERT_EQ(c.failures.size(), 1u);
  EXPECT_EQ(c.failures[0].line_number, 3);
  // Failed lines keep their table row, so CC(=O)O pairs with row 4.
  EXPECT_EQ(c.records[2].smiles, "CC(=O)O");
  EXPECT_EQ(c.records[2].line_number, 4);
  EXPECT_EQ(c.records[2].raw, (RawProperties { 8.0, 0.0, 7.0 }));
  EXPECT_EQ(c.records[1].raw, (RawProperties { 4.0, 1.0, std::nullopt }));

  EXPECT_THROW(load_corpus(smi, &t, cols, 0.1), DataError);
  const std::vector<std::string> unknown = { "w" };
  EXPECT_THROW(load_corpus(smi, &t, unknown, 0.5), DataError);
  t.rows.pop_back();
  EXPECT_THROW(load_corpus(smi, &t, cols, 0.5), DataError);
}

TEST_F(DatasetTest, FailureMessageListsLines) {
  const auto smi = write("f.smi", "C\nX1\nC(\nCC\n");
  try {
    load_corpus(smi);
    FAIL();
  } catch (const DataError &e) {
    const std::string m = e.what();
    EXPECT_NE(m.find("2 of 4"), std::string::npos) << m;
    EXPECT_NE(m.find("line 2"), std::string::npos) << m;
    EXPECT_NE(m.find("line 3"), std::string::npos) << m;
  }
}

TEST(Split, HashRuleAndProportions) {
  int counts[3] = {};
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const std::string s = "C" + std::to_string(i);
    const Split sp = split_of(s);
    const std::uint64_t h = fnv_oracle(s) % 100;
    EXPECT_EQ(sp, h < 90 ? Split::kTrain : h < 95 ? Split::kValid : Split::kTest);
    ++counts[static_cast<int>(sp)];
  }
  EXPECT_NEAR(counts[0] / double(n), 0.90, 0.01);
  EXPECT_NEAR(counts[1] / double(n), 0.05, 0.01);
  EXPECT_NEAR(counts[2] / double(n), 0.05, 0.01);
}

std::vector<Record> records_with(const std::vector<RawProperties> &raws) {
  std::vector<Record> out;
  for (std::size_t i = 0; i < raws.size(); ++i) {
    Record r;
    r.line_number = static_cast<int>(i) + 1;
    r.smiles = std::string(i + 1, 'C');
    r.graph = parse_smiles(r.smiles);
    r.raw = raws[i];
    out.push_back(std::move(r));
  }
  return out;
}

TEST(Declare, CategoricalCardinality) {
  const auto recs = records_with({ { 1.0, 0.0 }, { 2.0, 4.0 }, { 3.0, std::nullopt } });
  const std::vector<std::string> cols = { "x", "k" }, cat = { "k" };
  const auto defs = declare_properties(cols, recs, cat);
  EXPECT_EQ(defs[0].kind, PropertyKind::kContinuous);
  EXPECT_EQ(defs[1].kind, PropertyKind::kCategorical);
  EXPECT_EQ(defs[1].cardinality, 5);

  const auto bad = records_with({ { 1.0, 0.5 } });
  EXPECT_THROW(declare_properties(cols, bad, cat), DataError);
  const std::vector<std::string> stray = { "q" };
  EXPECT_THROW(declare_properties(cols, recs, stray), ArgumentError);
}

TEST(Declare, FitUsesTrainSplitOnly) {
  std::vector<RawProperties> raws;
  for (int i = 0; i < 60; ++i)
    raws.push_back({ static_cast<double>(i * i % 17) });
  const auto recs = records_with(raws);
  const std::vector<std::string> cols = { "x" };
  const PropertySpec s = fit_property_spec(cols, recs, {}, true);
  double sum = 0.0, sq = 0.0;
  int n = 0;
  for (const auto &r: recs)
    if (split_of(r.smiles) == Split::kTrain) {
      sum += *r.raw[0];
      sq += *r.raw[0] * *r.raw[0];
      ++n;
    }
  ASSERT_LT(n, 60);
  const double mean = sum / n;
  EXPECT_NEAR(s.defs()[0].mean, mean, 1e-12);
  EXPECT_NEAR(s.defs()[0].std, std::sqrt((sq - n * mean * mean) / (n - 1)), 1e-9);
}

TEST(Synthetic, DeterministicPerIndex) {
  const Vocab seed = testing::seed_vocab();
  const auto a = generate_synthetic(seed, 40, 16, 3);
  const auto b = generate_synthetic(seed, 10, 16, 3);
  ASSERT_EQ(a.size(), 40u);
  for (int i = 0; i < 10; ++i)
    EXPECT_EQ(canonical_key(a[i]), canonical_key(b[i]));
  const auto c = generate_synthetic(seed, 40, 16, 4);
  int same = 0;
  for (int i = 0; i < 40; ++i)
    same += canonical_key(a[i]) == canonical_key(c[i]);
  EXPECT_LT(same, 40);
  for (const auto &g: a)
    EXPECT_LE(static_cast<int>(encode(g, seed).size()), 16 * 3 / 2)
        << write_smiles(g);
  EXPECT_THROW(generate_synthetic(seed, -1, 16, 0), ArgumentError);
}

TEST(Synthetic, LongestEncoding) {
  const auto recs = records_with({ {}, {}, {}, {} });
  const Vocab v = induce_vocab(testing::parse_all({ "C", "CC", "CCC", "CCCC" }));
  // <bos> CH3 (- CH2)* - CH3 <eos> for butane.
  EXPECT_EQ(longest_encoding(recs, v), 9);
}

}  // namespace
}  // namespace stgg
