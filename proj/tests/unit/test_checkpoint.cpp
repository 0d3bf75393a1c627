//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "stgg/checkpoint.hpp"
#include "stgg/error.hpp"

namespace stgg {
namespace {

namespace fs = std::filesystem;

class CheckpointTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("stgg_ckpt_" + std::to_string(::testing::UnitTest::GetInstance()
                                              ->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
    graphs_ = testing::parse_all(testing::small_smiles());
    vocab_ = induce_vocab(graphs_, 4);
    spec_ = testing::toy_spec();
    cfg_ = ModelConfig::for_vocab(vocab_, spec_, 40);
    cfg_.d_model = 16;
    cfg_.n_layers = 2;
    cfg_.n_heads = 2;
  }
  void TearDown() override { fs::remove_all(dir_); }

  Checkpoint make(bool with_optimizer) const {
    Checkpoint c;
    c.config = cfg_;
    c.spec = spec_;
    c.vocab_digest = vocab_.digest();
    c.run_config = { { "seed", 9 }, { "note", "x" } };
    Rng rng(21);
    c.params = init_params<float>(cfg_, rng);
    if (with_optimizer) {
      OptimizerState s;
      s.m = init_params<float>(cfg_, rng);
      s.v = init_params<float>(cfg_, rng);
      s.step = 123;
      c.optimizer = s;
    }
    return c;
  }

  static bool same(const ModelParams<float> &a, const ModelParams<float> &b) {
    std::vector<const Mat<float> *> xs;
    a.visit([&](const std::string &, const Mat<float> &m, bool) {
      xs.push_back(&m);
    });
    std::size_t i = 0;
    bool ok = true;
    b.visit([&](const std::string &, const Mat<float> &m, bool) {
      ok = ok && i < xs.size() && xs[i]->rows() == m.rows() &&
           xs[i]->cols() == m.cols() &&
           std::memcmp(xs[i]->data(), m.data(), sizeof(float) * m.size()) == 0;
      ++i;
    });
    return ok && i == xs.size();
  }

  FormatErrorKind load_error(const fs::path &p, const Vocab *v = nullptr) {
    try {
      load_checkpoint(p, v);
    } catch (const FormatError &e) {
      return e.kind();
    }
    ADD_FAILURE() << "load succeeded";
    return FormatErrorKind::kIo;
  }

  fs::path dir_;
  std::vector<MolGraph> graphs_;
  Vocab vocab_;
  PropertySpec spec_;
  ModelConfig cfg_;
};

TEST_F(CheckpointTest, RoundTripIsBitExact) {
  for (bool legacy: { false, true }) {
    cfg_.legacy_arch = legacy;
    cfg_.single_layer_prop_encoder = legacy;
    const Checkpoint c = make(true);
    save_checkpoint(dir_ / "a.ckpt", c);
    const Checkpoint r = load_checkpoint(dir_ / "a.ckpt", &vocab_);
    EXPECT_EQ(r.config, c.config);
    EXPECT_EQ(r.spec, c.spec);
    EXPECT_EQ(r.vocab_digest, c.vocab_digest);
    EXPECT_EQ(r.run_config, c.run_config);
    EXPECT_TRUE(same(r.params, c.params));
    ASSERT_TRUE(r.optimizer.has_value());
    EXPECT_EQ(r.optimizer->step, 123);
    EXPECT_TRUE(same(r.optimizer->m, c.optimizer->m));
    EXPECT_TRUE(same(r.optimizer->v, c.optimizer->v));
  }
}

TEST_F(CheckpointTest, WithoutOptimizer) {
  save_checkpoint(dir_ / "b.ckpt", make(false));
  EXPECT_FALSE(load_checkpoint(dir_ / "b.ckpt").optimizer.has_value());
}

TEST_F(CheckpointTest, Errors) {
  EXPECT_EQ(load_error(dir_ / "missing.ckpt"), FormatErrorKind::kIo);

  std::ofstream(dir_ / "junk.ckpt") << "definitely not a checkpoint";
  EXPECT_EQ(load_error(dir_ / "junk.ckpt"), FormatErrorKind::kMalformed);

  save_checkpoint(dir_ / "c.ckpt", make(true));
  const auto size = fs::file_size(dir_ / "c.ckpt");

  const Vocab other = induce_vocab(testing::parse_all({ "CCO", "CN" }), 4);
  EXPECT_EQ(load_error(dir_ / "c.ckpt", &other), FormatErrorKind::kHashMismatch);

  fs::copy_file(dir_ / "c.ckpt", dir_ / "t.ckpt");
  fs::resize_file(dir_ / "t.ckpt", size - 7);
  EXPECT_EQ(load_error(dir_ / "t.ckpt"), FormatErrorKind::kMalformed);

  fs::copy_file(dir_ / "c.ckpt", dir_ / "x.ckpt");
  std::ofstream(dir_ / "x.ckpt", std::ios::app | std::ios::binary) << 'z';
  EXPECT_EQ(load_error(dir_ / "x.ckpt"), FormatErrorKind::kMalformed);

  fs::copy_file(dir_ / "c.ckpt", dir_ / "v.ckpt");
  {
    std::fstream f(dir_ / "v.ckpt", std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(8);
    const std::uint32_t bad = kCheckpointVersion + 1;
    f.write(reinterpret_cast<const char *>(&bad), sizeof(bad));
  }
  EXPECT_EQ(load_error(dir_ / "v.ckpt"), FormatErrorKind::kVersionMismatch);
}

}  // namespace
}  // namespace stgg
