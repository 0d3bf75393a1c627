//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef STGG_MODEL_HPP_
#define STGG_MODEL_HPP_

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "stgg/codec.hpp"
#include "stgg/hash.hpp"
#include "stgg/properties.hpp"
#include "stgg/vocab.hpp"

namespace stgg {

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using RowVec = Eigen::Matrix<T, 1, Eigen::Dynamic>;

struct ModelConfig {
  int vocab_size = 0;
  int r_max = Vocab::kDefaultRMax;
  int max_len = 64;
  int d_model = 64;
  int n_layers = 3;
  int n_heads = 4;
  int ffn_mult = 2;
  double rope_base = 10000.0;
  double norm_eps = 1e-6;
  double init_std = 0.02;
  int n_continuous = 0;
  std::vector<int> cardinalities;
  /// LayerNorm with gain and bias, learned absolute positions, GELU FFN.
  bool legacy_arch = false;
  /// One linear map for the continuous property inputs instead of the
  /// two-layer Swish MLP.
  bool single_layer_prop_encoder = false;

  static ModelConfig for_vocab(const Vocab &v, const PropertySpec &spec,
                               int max_len);

  int head_dim() const { return d_model / n_heads; }
  int ffn_dim() const { return ffn_mult * d_model; }
  /// Rows of the linear token head: every token except [eor-i].
  int head_tokens() const { return vocab_size - r_max; }
  int property_outputs() const;
  /// Linear-head column of a non-ring-close token id.
  int head_column(int id) const {
    return id < Vocab::kFirstRingClose ? id : id - r_max;
  }

  /// Throws ArgumentError when inconsistent.
  void validate() const;

  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json &j);

  friend bool operator==(const ModelConfig &, const ModelConfig &) = default;
};

template <class T>
struct LayerParams {
  Mat<T> norm1_g, norm1_b;  // _b only in the legacy architecture
  Mat<T> wq, wk, wv, wo;
  Mat<T> norm2_g, norm2_b;
  Mat<T> w_gate;  // SwiGLU only
  Mat<T> w_up, w_down;
};

/// Every learnable tensor. Vectors are stored as 1-row matrices.
template <class T>
struct ModelParams {
  Mat<T> tok_emb;   // V x d
  Mat<T> ring_emb;  // (r_max + 1) x d
  Mat<T> pos_emb;   // max_len x d, legacy only
  Mat<T> prop_w1;   // 2C x d
  Mat<T> prop_w2;   // d x d, absent for the single-layer encoder
  std::vector<Mat<T>> cat_emb;  // (cardinality + 1) x d; last row = missing
  std::vector<LayerParams<T>> layers;
  Mat<T> final_g, final_b;
  Mat<T> head_tok;   // d x head_tokens
  Mat<T> head_prop;  // d x property_outputs

  /// Calls f(name, tensor, decay) for every tensor present in the
  /// configuration, in a fixed order. decay is false for norm parameters.
  template <class F>
  void visit(F &&f);
  template <class F>
  void visit(F &&f) const;

  /// Same shapes, all zeros.
  ModelParams zeros_like() const;
  std::size_t parameter_count() const;
};

template <class T>
ModelParams<T> init_params(const ModelConfig &cfg, Rng &rng);

template <class U, class T>
ModelParams<U> cast_params(const ModelParams<T> &p) {
  ModelParams<U> out;
  auto c = [](const Mat<T> &m) { return Mat<U>(m.template cast<U>()); };
  out.tok_emb = c(p.tok_emb);
  out.ring_emb = c(p.ring_emb);
  out.pos_emb = c(p.pos_emb);
  out.prop_w1 = c(p.prop_w1);
  out.prop_w2 = c(p.prop_w2);
  for (const auto &m: p.cat_emb)
    out.cat_emb.push_back(c(m));
  for (const auto &l: p.layers)
    out.layers.push_back({ c(l.norm1_g), c(l.norm1_b), c(l.wq), c(l.wk),
                           c(l.wv), c(l.wo), c(l.norm2_g), c(l.norm2_b),
                           c(l.w_gate), c(l.w_up), c(l.w_down) });
  out.final_g = c(p.final_g);
  out.final_b = c(p.final_b);
  out.head_tok = c(p.head_tok);
  out.head_prop = c(p.head_prop);
  return out;
}

/// One training or evaluation example.
struct Example {
  TokenSeq tokens;        // <bos> ... <eos>
  PropertyVector cond;    // conditioning, after random masking
  PropertyVector target;  // final-molecule properties for the property loss
};

/// Sequences packed back to back without padding.
struct Batch {
  std::vector<int> offset = { 0 };  // n_seq + 1 row offsets
  std::vector<int> tokens;
  std::vector<int> ring_count;      // open anchors after each token, clamped
  std::vector<int> anchor_offset = { 0 };
  std::vector<int> anchor_row;      // packed rows of the open [bor] tokens
  std::vector<PropertyVector> cond;
  std::vector<PropertyVector> target;

  int seq_count() const { return static_cast<int>(offset.size()) - 1; }
  int rows() const { return offset.back(); }
};

/// Throws DecodeError for sequences with bad ring closes.
Batch make_batch(std::span<const Example> examples, const Vocab &v);

struct LossParts {
  double total = 0.0;
  double token_ce = 0.0;
  double prop_loss = 0.0;  // MSE + categorical CE
  double prop_mse = 0.0;
  int token_targets = 0;
};

template <class T>
struct ForwardOutput {
  Mat<T> logits;  // rows x vocab_size; unavailable [eor-i] are -inf
  Mat<T> props;   // rows x property_outputs
};

template <class T>
ForwardOutput<T> forward(const ModelParams<T> &p, const ModelConfig &cfg,
                         const Batch &b);

/// Token CE (mean over next-token targets) + lambda * property loss (mean
/// squared error over present continuous targets plus mean CE over present
/// categorical targets, at every position). Fills grad when non-null.
/// Throws InvariantError on a non-finite loss.
template <class T>
LossParts loss_and_grad(const ModelParams<T> &p, const ModelConfig &cfg,
                        const Batch &b, double lambda, ModelParams<T> *grad);

/// Property encoding added to every token embedding.
template <class T>
RowVec<T> encode_properties(const ModelParams<T> &p, const ModelConfig &cfg,
                            const PropertyVector &pv);

/// Row-wise RMSNorm with gain g (1 x d).
template <class T>
Mat<T> rms_norm(const Mat<T> &x, const Mat<T> &g, double eps);

/// Rotary encoding of each row of x (n_heads blocks of width
/// x.cols() / n_heads) at the given positions.
template <class T>
void rotary_encode(Mat<T> &x, std::span<const int> positions, int n_heads,
                   double base);

/// Incremental single-sequence evaluation with a key/value cache.
class InferenceSession {
 public:
  InferenceSession(const ModelParams<float> &p, const ModelConfig &cfg,
                   const Vocab &v, const PropertyVector &cond);

  /// Feeds the next token. Throws ArgumentError past max_len.
  void push(int token);
  int length() const { return len_; }

  /// Next-token logits after the last pushed token.
  const RowVec<float> &logits() const { return logits_; }
  /// Property head output at the last pushed token.
  const RowVec<float> &properties() const { return props_; }

 private:
  const ModelParams<float> &p_;
  const ModelConfig &cfg_;
  const Vocab &v_;
  RowVec<float> penc_;
  std::vector<Mat<float>> k_cache_, v_cache_;
  Mat<float> y_hist_;
  Mat<float> rope_cos_, rope_sin_;
  AnchorTrack track_;
  int len_ = 0;
  RowVec<float> logits_, props_;
};

/// Standardized continuous predictions and categorical argmax from a
/// property-head row.
PropertyVector decode_property_row(const ModelConfig &cfg,
                                   const RowVec<float> &row);

// ---- implementation of the visitor --------------------------------------

template <class T>
template <class F>
void ModelParams<T>::visit(F &&f) {
  auto v = [&](const std::string &n, Mat<T> &m, bool decay) {
    if (m.size() > 0)
      f(n, m, decay);
  };
  v("tok_emb", tok_emb, true);
  v("ring_emb", ring_emb, true);
  v("pos_emb", pos_emb, true);
  v("prop.w1", prop_w1, true);
  v("prop.w2", prop_w2, true);
  for (std::size_t j = 0; j < cat_emb.size(); ++j)
    v("prop.cat" + std::to_string(j), cat_emb[j], true);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    LayerParams<T> &L = layers[l];
    const std::string s = "layer" + std::to_string(l) + ".";
    v(s + "norm1.g", L.norm1_g, false);
    v(s + "norm1.b", L.norm1_b, false);
    v(s + "wq", L.wq, true);
    v(s + "wk", L.wk, true);
    v(s + "wv", L.wv, true);
    v(s + "wo", L.wo, true);
    v(s + "norm2.g", L.norm2_g, false);
    v(s + "norm2.b", L.norm2_b, false);
    v(s + "w_gate", L.w_gate, true);
    v(s + "w_up", L.w_up, true);
    v(s + "w_down", L.w_down, true);
  }
  v("final.g", final_g, false);
  v("final.b", final_b, false);
  v("head.tok", head_tok, true);
  v("head.prop", head_prop, true);
}

template <class T>
template <class F>
void ModelParams<T>::visit(F &&f) const {
  const_cast<ModelParams<T> *>(this)->visit(
      [&](const std::string &n, Mat<T> &m, bool decay) {
        f(n, static_cast<const Mat<T> &>(m), decay);
      });
}

}  // namespace stgg

#endif  // STGG_MODEL_HPP_
