//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "stgg/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "stgg/error.hpp"

namespace stgg {

// ---- configuration ---------------------------------------------------------

ModelConfig ModelConfig::for_vocab(const Vocab &v, const PropertySpec &spec,
                                   int max_len) {
  ModelConfig c;
  c.vocab_size = v.size();
  c.r_max = v.r_max();
  c.max_len = max_len;
  c.n_continuous = spec.continuous_count();
  c.cardinalities = spec.cardinalities();
  return c;
}

int ModelConfig::property_outputs() const {
  return n_continuous +
         std::accumulate(cardinalities.begin(), cardinalities.end(), 0);
}

void ModelConfig::validate() const {
  auto need = [](bool ok, const char *msg) {
    if (!ok)
      throw ArgumentError(std::string("model config: ") + msg);
  };
  need(r_max >= 1, "r_max must be positive");
  need(vocab_size > Vocab::kFirstRingClose + r_max,
       "vocab_size leaves no atom tokens");
  need(d_model > 0 && n_heads > 0 && d_model % n_heads == 0,
       "d_model must be a positive multiple of n_heads");
  need(head_dim() % 2 == 0, "head dimension must be even");
  need(n_layers >= 1, "n_layers must be positive");
  need(ffn_mult >= 1, "ffn_mult must be positive");
  need(max_len >= 3, "max_len must be at least 3");
  need(norm_eps > 0.0 && init_std > 0.0 && rope_base > 1.0,
       "norm_eps, init_std and rope_base must be positive");
  need(n_continuous >= 0, "n_continuous must be non-negative");
  for (int c: cardinalities)
    need(c >= 1, "cardinalities must be positive");
}

nlohmann::json ModelConfig::to_json() const {
  return { { "vocab_size", vocab_size },
           { "r_max", r_max },
           { "max_len", max_len },
           { "d_model", d_model },
           { "n_layers", n_layers },
           { "n_heads", n_heads },
           { "ffn_mult", ffn_mult },
           { "rope_base", rope_base },
           { "norm_eps", norm_eps },
           { "init_std", init_std },
           { "n_continuous", n_continuous },
           { "cardinalities", cardinalities },
           { "legacy_arch", legacy_arch },
           { "single_layer_prop_encoder", single_layer_prop_encoder } };
}

ModelConfig ModelConfig::from_json(const nlohmann::json &j) {
  ModelConfig c;
  c.vocab_size = j.at("vocab_size").get<int>();
  c.r_max = j.at("r_max").get<int>();
  c.max_len = j.at("max_len").get<int>();
  c.d_model = j.at("d_model").get<int>();
  c.n_layers = j.at("n_layers").get<int>();
  c.n_heads = j.at("n_heads").get<int>();
  c.ffn_mult = j.at("ffn_mult").get<int>();
  c.rope_base = j.at("rope_base").get<double>();
  c.norm_eps = j.at("norm_eps").get<double>();
  c.init_std = j.at("init_std").get<double>();
  c.n_continuous = j.at("n_continuous").get<int>();
  c.cardinalities = j.at("cardinalities").get<std::vector<int>>();
  c.legacy_arch = j.at("legacy_arch").get<bool>();
  c.single_layer_prop_encoder = j.at("single_layer_prop_encoder").get<bool>();
  c.validate();
  return c;
}

// ---- parameters ------------------------------------------------------------

template <class T>
ModelParams<T> ModelParams<T>::zeros_like() const {
  ModelParams<T> z = *this;
  z.visit([](const std::string &, Mat<T> &m, bool) { m.setZero(); });
  return z;
}

template <class T>
std::size_t ModelParams<T>::parameter_count() const {
  std::size_t n = 0;
  visit([&](const std::string &, const Mat<T> &m, bool) { n += m.size(); });
  return n;
}

namespace {

template <class T>
Mat<T> normal(int rows, int cols, double std, Rng &rng) {
  std::normal_distribution<double> nd(0.0, std);
  Mat<T> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i)
    m.data()[i] = static_cast<T>(nd(rng));
  return m;
}

template <class T>
Mat<T> constant(int cols, double value) {
  return Mat<T>::Constant(1, cols, static_cast<T>(value));
}

}  // namespace

template <class T>
ModelParams<T> init_params(const ModelConfig &cfg, Rng &rng) {
  cfg.validate();
  const int d = cfg.d_model;
  const double s = cfg.init_std;
  const double s_res = s / std::sqrt(2.0 * cfg.n_layers);
  ModelParams<T> p;
  p.tok_emb = normal<T>(cfg.vocab_size, d, s, rng);
  p.ring_emb = normal<T>(cfg.r_max + 1, d, s, rng);
  if (cfg.legacy_arch)
    p.pos_emb = normal<T>(cfg.max_len, d, s, rng);
  if (cfg.n_continuous > 0) {
    p.prop_w1 = normal<T>(2 * cfg.n_continuous, d, s, rng);
    if (!cfg.single_layer_prop_encoder)
      p.prop_w2 = normal<T>(d, d, s, rng);
  }
  for (int c: cfg.cardinalities)
    p.cat_emb.push_back(normal<T>(c + 1, d, s, rng));
  for (int l = 0; l < cfg.n_layers; ++l) {
    LayerParams<T> L;
    L.norm1_g = constant<T>(d, 1.0);
    L.norm2_g = constant<T>(d, 1.0);
    if (cfg.legacy_arch) {
      L.norm1_b = constant<T>(d, 0.0);
      L.norm2_b = constant<T>(d, 0.0);
    }
    L.wq = normal<T>(d, d, s, rng);
    L.wk = normal<T>(d, d, s, rng);
    L.wv = normal<T>(d, d, s, rng);
    L.wo = normal<T>(d, d, s_res, rng);
    if (!cfg.legacy_arch)
      L.w_gate = normal<T>(d, cfg.ffn_dim(), s, rng);
    L.w_up = normal<T>(d, cfg.ffn_dim(), s, rng);
    L.w_down = normal<T>(cfg.ffn_dim(), d, s_res, rng);
    p.layers.push_back(std::move(L));
  }
  p.final_g = constant<T>(d, 1.0);
  if (cfg.legacy_arch)
    p.final_b = constant<T>(d, 0.0);
  p.head_tok = normal<T>(d, cfg.head_tokens(), s, rng);
  if (cfg.property_outputs() > 0)
    p.head_prop = normal<T>(d, cfg.property_outputs(), s, rng);
  return p;
}

// ---- batching --------------------------------------------------------------

Batch make_batch(std::span<const Example> examples, const Vocab &v) {
  Batch b;
  for (const Example &ex: examples) {
    const int base = b.rows();
    const AnchorTrack track(ex.tokens, v);
    for (std::size_t t = 0; t < ex.tokens.size(); ++t) {
      b.tokens.push_back(ex.tokens[t]);
      b.ring_count.push_back(std::min(track.open_count(t), v.r_max()));
      for (int pos: track.anchor_positions(t))
        b.anchor_row.push_back(base + pos);
      b.anchor_offset.push_back(static_cast<int>(b.anchor_row.size()));
    }
    b.offset.push_back(base + static_cast<int>(ex.tokens.size()));
    b.cond.push_back(ex.cond);
    b.target.push_back(ex.target);
  }
  return b;
}

// ---- kernels ---------------------------------------------------------------

namespace {

template <class T>
struct NormCache {
  Mat<T> xhat;
  std::vector<T> inv;
};

template <class T>
void norm_forward(const Mat<T> &x, const Mat<T> &g, const Mat<T> &b,
                  bool layer_norm, double eps, Mat<T> &out,
                  NormCache<T> *cache) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  Mat<T> xhat(n, d);
  std::vector<T> inv(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (layer_norm) {
      const T mu = x.row(i).mean();
      const auto xc = (x.row(i).array() - mu).matrix();
      const T var = xc.squaredNorm() / static_cast<T>(d);
      inv[i] = T(1) / std::sqrt(var + static_cast<T>(eps));
      xhat.row(i) = xc * inv[i];
    } else {
      const T ms = x.row(i).squaredNorm() / static_cast<T>(d);
      inv[i] = T(1) / std::sqrt(ms + static_cast<T>(eps));
      xhat.row(i) = x.row(i) * inv[i];
    }
  }
  out = (xhat.array().rowwise() * g.row(0).array()).matrix();
  if (b.size() > 0)
    out.rowwise() += b.row(0);
  if (cache) {
    cache->xhat = std::move(xhat);
    cache->inv = std::move(inv);
  }
}

// Returns dx; accumulates into dg and db.
template <class T>
Mat<T> norm_backward(const Mat<T> &dy, const NormCache<T> &c, const Mat<T> &g,
                     bool layer_norm, Mat<T> &dg, Mat<T> *db) {
  const Eigen::Index n = dy.rows();
  const T d = static_cast<T>(dy.cols());
  dg += (dy.array() * c.xhat.array()).colwise().sum().matrix();
  if (db)
    *db += dy.colwise().sum();
  Mat<T> dxhat = (dy.array().rowwise() * g.row(0).array()).matrix();
  Mat<T> dx(n, dy.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const T m2 = dxhat.row(i).dot(c.xhat.row(i)) / d;
    if (layer_norm) {
      const T m1 = dxhat.row(i).sum() / d;
      dx.row(i) = ((dxhat.row(i).array() - m1) - c.xhat.row(i).array() * m2) *
                  c.inv[i];
    } else {
      dx.row(i) = (dxhat.row(i) - c.xhat.row(i) * m2) * c.inv[i];
    }
  }
  return dx;
}

template <class T>
T sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

template <class T>
T silu(T x) {
  return x * sigmoid(x);
}

template <class T>
T silu_grad(T x) {
  const T s = sigmoid(x);
  return s * (T(1) + x * (T(1) - s));
}

template <class T>
T gelu(T x) {
  return T(0.5) * x * (T(1) + std::erf(x / std::sqrt(T(2))));
}

template <class T>
T gelu_grad(T x) {
  const T pdf = std::exp(T(-0.5) * x * x) / std::sqrt(T(2) * T(M_PI));
  return T(0.5) * (T(1) + std::erf(x / std::sqrt(T(2)))) + x * pdf;
}

template <class T>
struct RopeTable {
  Mat<T> cos, sin;  // max_len x head_dim/2

  explicit RopeTable(const ModelConfig &cfg) {
    const int half = cfg.head_dim() / 2;
    cos.resize(cfg.max_len, half);
    sin.resize(cfg.max_len, half);
    for (int p = 0; p < cfg.max_len; ++p)
      for (int j = 0; j < half; ++j) {
        const double theta =
            std::pow(cfg.rope_base, -2.0 * j / cfg.head_dim());
        cos(p, j) = static_cast<T>(std::cos(p * theta));
        sin(p, j) = static_cast<T>(std::sin(p * theta));
      }
  }
};

// Rotates pairs (2j, 2j+1) of every head; transpose=true applies the inverse
// rotation, which is the backward map.
template <class T, class Row>
void rope_rotate(Row &&row, int pos, int n_heads, int dh, bool transpose,
                 const Mat<T> &cos, const Mat<T> &sin) {
  for (int h = 0; h < n_heads; ++h)
    for (int j = 0; j < dh / 2; ++j) {
      const T c = cos(pos, j);
      const T s = transpose ? -sin(pos, j) : sin(pos, j);
      const int k = h * dh + 2 * j;
      const T x0 = row(k);
      const T x1 = row(k + 1);
      row(k) = x0 * c - x1 * s;
      row(k + 1) = x0 * s + x1 * c;
    }
}

template <class T>
T neg_inf() {
  return -std::numeric_limits<T>::infinity();
}

}  // namespace

template <class T>
Mat<T> rms_norm(const Mat<T> &x, const Mat<T> &g, double eps) {
  Mat<T> out;
  norm_forward<T>(x, g, Mat<T>(), false, eps, out, nullptr);
  return out;
}

template <class T>
void rotary_encode(Mat<T> &x, std::span<const int> positions, int n_heads,
                   double base) {
  if (static_cast<Eigen::Index>(positions.size()) != x.rows() ||
      n_heads < 1 || x.cols() % n_heads != 0 || (x.cols() / n_heads) % 2)
    throw ArgumentError("rotary_encode: bad shape");
  const int dh = static_cast<int>(x.cols()) / n_heads;
  Mat<T> cos(1, dh / 2), sin(1, dh / 2);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (int j = 0; j < dh / 2; ++j) {
      const double theta = std::pow(base, -2.0 * j / dh);
      cos(0, j) = static_cast<T>(std::cos(positions[r] * theta));
      sin(0, j) = static_cast<T>(std::sin(positions[r] * theta));
    }
    rope_rotate<T>(x.row(r), 0, n_heads, dh, false, cos, sin);
  }
}

namespace {

template <class T>
struct LayerTrace {
  Mat<T> x_in, h1, q, k, v, att, x_mid, h2, a, u, f;
  NormCache<T> n1, n2;
  std::vector<Mat<T>> probs;  // seq-major, then head
};

template <class T>
struct Trace {
  Mat<T> u_in, h_mlp, a_mlp, penc;
  std::vector<int> seq_of_row, pos_of_row;
  std::vector<LayerTrace<T>> layers;
  NormCache<T> nf;
  Mat<T> y, logits, props;
};

template <class T>
Mat<T> property_inputs(const ModelConfig &cfg, const Batch &b) {
  Mat<T> u(b.seq_count(), 2 * cfg.n_continuous);
  for (int s = 0; s < b.seq_count(); ++s) {
    const PropertyVector &pv = b.cond[s];
    if (static_cast<int>(pv.value.size()) != cfg.n_continuous ||
        pv.category.size() != cfg.cardinalities.size())
      throw ArgumentError("property vector does not match the model");
    for (int i = 0; i < cfg.n_continuous; ++i) {
      u(s, i) = pv.missing[i] ? T(0) : static_cast<T>(pv.value[i]);
      u(s, cfg.n_continuous + i) = static_cast<T>(pv.missing[i]);
    }
  }
  return u;
}

template <class T>
int category_row(const ModelConfig &cfg, const PropertyVector &pv, int j) {
  const int c = pv.category[j];
  if (c == PropertyVector::kMissing)
    return cfg.cardinalities[j];
  if (c < 0 || c >= cfg.cardinalities[j])
    throw ArgumentError("category id out of range");
  return c;
}

template <class T>
void encode_batch_properties(const ModelParams<T> &p, const ModelConfig &cfg,
                             const Batch &b, Trace<T> &tr) {
  const int d = cfg.d_model;
  tr.penc = Mat<T>::Zero(b.seq_count(), d);
  if (cfg.n_continuous > 0) {
    tr.u_in = property_inputs<T>(cfg, b);
    tr.h_mlp = tr.u_in * p.prop_w1;
    if (cfg.single_layer_prop_encoder) {
      tr.penc = tr.h_mlp;
    } else {
      tr.a_mlp = tr.h_mlp.unaryExpr([](T x) { return silu(x); });
      tr.penc = tr.a_mlp * p.prop_w2;
    }
  }
  for (int s = 0; s < b.seq_count(); ++s)
    for (std::size_t j = 0; j < cfg.cardinalities.size(); ++j)
      tr.penc.row(s) +=
          p.cat_emb[j].row(category_row<T>(cfg, b.cond[s], static_cast<int>(j)));
}

template <class T>
void run_forward(const ModelParams<T> &p, const ModelConfig &cfg,
                 const Batch &b, Trace<T> &tr) {
  cfg.validate();
  const int n = b.rows();
  const int d = cfg.d_model;
  const int H = cfg.n_heads;
  const int dh = cfg.head_dim();
  const T scale = T(1) / std::sqrt(static_cast<T>(dh));
  for (int s = 0; s < b.seq_count(); ++s)
    if (b.offset[s + 1] - b.offset[s] > cfg.max_len)
      throw ArgumentError("sequence longer than max_len");
  for (int t: b.tokens)
    if (t < 0 || t >= cfg.vocab_size)
      throw ArgumentError("token id outside the model vocabulary");

  tr.seq_of_row.resize(n);
  tr.pos_of_row.resize(n);
  for (int s = 0; s < b.seq_count(); ++s)
    for (int r = b.offset[s]; r < b.offset[s + 1]; ++r) {
      tr.seq_of_row[r] = s;
      tr.pos_of_row[r] = r - b.offset[s];
    }

  encode_batch_properties(p, cfg, b, tr);
  Mat<T> x(n, d);
  for (int r = 0; r < n; ++r) {
    x.row(r) = p.tok_emb.row(b.tokens[r]) + p.ring_emb.row(b.ring_count[r]) +
               tr.penc.row(tr.seq_of_row[r]);
    if (cfg.legacy_arch)
      x.row(r) += p.pos_emb.row(tr.pos_of_row[r]);
  }

  const RopeTable<T> rope(cfg);
  tr.layers.resize(cfg.n_layers);
  for (int l = 0; l < cfg.n_layers; ++l) {
    const LayerParams<T> &L = p.layers[l];
    LayerTrace<T> &lt = tr.layers[l];
    lt.x_in = x;
    norm_forward(x, L.norm1_g, L.norm1_b, cfg.legacy_arch, cfg.norm_eps, lt.h1,
                 &lt.n1);
    lt.q = lt.h1 * L.wq;
    lt.k = lt.h1 * L.wk;
    lt.v = lt.h1 * L.wv;
    if (!cfg.legacy_arch)
      for (int r = 0; r < n; ++r) {
        rope_rotate<T>(lt.q.row(r), tr.pos_of_row[r], H, dh, false, rope.cos, rope.sin);
        rope_rotate<T>(lt.k.row(r), tr.pos_of_row[r], H, dh, false, rope.cos, rope.sin);
      }
    lt.att.resize(n, d);
    lt.probs.clear();
    for (int s = 0; s < b.seq_count(); ++s) {
      const int o = b.offset[s];
      const int len = b.offset[s + 1] - o;
      for (int h = 0; h < H; ++h) {
        Mat<T> S = (lt.q.block(o, h * dh, len, dh) *
                    lt.k.block(o, h * dh, len, dh).transpose()) *
                   scale;
        for (int i = 0; i < len; ++i) {
          const T m = S.row(i).head(i + 1).maxCoeff();
          T z = 0;
          for (int j = 0; j <= i; ++j) {
            S(i, j) = std::exp(S(i, j) - m);
            z += S(i, j);
          }
          for (int j = 0; j <= i; ++j)
            S(i, j) /= z;
          for (int j = i + 1; j < len; ++j)
            S(i, j) = T(0);
        }
        lt.att.block(o, h * dh, len, dh) = S * lt.v.block(o, h * dh, len, dh);
        lt.probs.push_back(std::move(S));
      }
    }
    lt.x_mid = lt.x_in + lt.att * L.wo;
    norm_forward(lt.x_mid, L.norm2_g, L.norm2_b, cfg.legacy_arch,
                 cfg.norm_eps, lt.h2, &lt.n2);
    lt.u = lt.h2 * L.w_up;
    if (cfg.legacy_arch) {
      lt.f = lt.u.unaryExpr([](T v) { return gelu(v); });
    } else {
      lt.a = lt.h2 * L.w_gate;
      lt.f = (lt.a.unaryExpr([](T v) { return silu(v); }).array() *
              lt.u.array())
                 .matrix();
    }
    x = lt.x_mid + lt.f * L.w_down;
  }

  norm_forward(x, p.final_g, p.final_b, cfg.legacy_arch, cfg.norm_eps, tr.y,
               &tr.nf);

  const Mat<T> z = tr.y * p.head_tok;
  const int R = cfg.r_max;
  const int first = Vocab::kFirstRingClose;
  const T sim_scale = T(1) / std::sqrt(static_cast<T>(d));
  tr.logits.resize(n, cfg.vocab_size);
  tr.logits.leftCols(first) = z.leftCols(first);
  tr.logits.rightCols(cfg.vocab_size - first - R) =
      z.rightCols(cfg.head_tokens() - first);
  tr.logits.middleCols(first, R).setConstant(neg_inf<T>());
  for (int r = 0; r < n; ++r) {
    const int a0 = b.anchor_offset[r];
    const int k = std::min(b.anchor_offset[r + 1] - a0, R);
    for (int i = 0; i < k; ++i)
      tr.logits(r, first + i) =
          tr.y.row(r).dot(tr.y.row(b.anchor_row[a0 + i])) * sim_scale;
  }
  if (cfg.property_outputs() > 0)
    tr.props = tr.y * p.head_prop;
  else
    tr.props.resize(n, 0);
}

}  // namespace

template <class T>
ForwardOutput<T> forward(const ModelParams<T> &p, const ModelConfig &cfg,
                         const Batch &b) {
  Trace<T> tr;
  run_forward(p, cfg, b, tr);
  return { std::move(tr.logits), std::move(tr.props) };
}

template <class T>
RowVec<T> encode_properties(const ModelParams<T> &p, const ModelConfig &cfg,
                            const PropertyVector &pv) {
  Batch b;
  b.cond.push_back(pv);
  b.offset.push_back(0);
  Trace<T> tr;
  encode_batch_properties(p, cfg, b, tr);
  return tr.penc.row(0);
}

template <class T>
LossParts loss_and_grad(const ModelParams<T> &p, const ModelConfig &cfg,
                        const Batch &b, double lambda, ModelParams<T> *grad) {
  Trace<T> tr;
  run_forward(p, cfg, b, tr);
  const int n = b.rows();
  const int V = cfg.vocab_size;
  const int C = cfg.n_continuous;
  const int P = cfg.property_outputs();

  LossParts out;
  for (int s = 0; s < b.seq_count(); ++s)
    out.token_targets += std::max(0, b.offset[s + 1] - b.offset[s] - 1);

  Mat<T> dlogits = Mat<T>::Zero(n, V);
  double ce = 0.0;
  for (int r = 0; r < n; ++r) {
    const int s = tr.seq_of_row[r];
    if (r + 1 >= b.offset[s + 1] || b.tokens[r + 1] == Vocab::kPad)
      continue;
    const auto row = tr.logits.row(r);
    const T m = row.maxCoeff();
    T z = 0;
    for (int j = 0; j < V; ++j)
      z += std::exp(row(j) - m);
    const T lse = m + std::log(z);
    ce += static_cast<double>(lse - row(b.tokens[r + 1]));
    if (grad) {
      const T w = T(1) / static_cast<T>(out.token_targets);
      for (int j = 0; j < V; ++j)
        dlogits(r, j) = std::exp(row(j) - lse) * w;
      dlogits(r, b.tokens[r + 1]) -= w;
    }
  }
  out.token_ce = out.token_targets > 0 ? ce / out.token_targets : 0.0;

  // Property loss over every position of each sequence.
  Mat<T> dprops = Mat<T>::Zero(n, P);
  double sq = 0.0, cat_ce = 0.0;
  long n_sq = 0, n_cat = 0;
  for (int s = 0; s < b.seq_count(); ++s) {
    const int len = b.offset[s + 1] - b.offset[s];
    const PropertyVector &tg = b.target[s];
    for (int i = 0; i < C; ++i)
      n_sq += tg.missing[i] ? 0 : len;
    for (std::size_t j = 0; j < cfg.cardinalities.size(); ++j)
      n_cat += tg.category[j] == PropertyVector::kMissing ? 0 : len;
  }
  for (int r = 0; r < n && P > 0; ++r) {
    const PropertyVector &tg = b.target[tr.seq_of_row[r]];
    for (int i = 0; i < C; ++i) {
      if (tg.missing[i])
        continue;
      const T e = tr.props(r, i) - static_cast<T>(tg.value[i]);
      sq += static_cast<double>(e * e);
      if (grad)
        dprops(r, i) = static_cast<T>(2.0 * lambda / n_sq) * e;
    }
    int col = C;
    for (std::size_t j = 0; j < cfg.cardinalities.size(); ++j) {
      const int card = cfg.cardinalities[j];
      const int c = tg.category[j];
      if (c != PropertyVector::kMissing) {
        const auto seg = tr.props.row(r).segment(col, card);
        const T m = seg.maxCoeff();
        const T lse = m + std::log((seg.array() - m).exp().sum());
        cat_ce += static_cast<double>(lse - seg(c));
        if (grad) {
          const T w = static_cast<T>(lambda / n_cat);
          for (int q = 0; q < card; ++q)
            dprops(r, col + q) = std::exp(seg(q) - lse) * w;
          dprops(r, col + c) -= w;
        }
      }
      col += card;
    }
  }
  out.prop_mse = n_sq > 0 ? sq / n_sq : 0.0;
  out.prop_loss = out.prop_mse + (n_cat > 0 ? cat_ce / n_cat : 0.0);
  out.total = out.token_ce + lambda * out.prop_loss;
  if (!std::isfinite(out.total))
    throw InvariantError("non-finite loss");
  if (!grad)
    return out;

  ModelParams<T> &g = *grad;
  if (g.tok_emb.size() == 0)
    g = p.zeros_like();

  // Heads.
  const int first = Vocab::kFirstRingClose;
  const int R = cfg.r_max;
  Mat<T> dz(n, cfg.head_tokens());
  dz.leftCols(first) = dlogits.leftCols(first);
  dz.rightCols(cfg.head_tokens() - first) =
      dlogits.rightCols(V - first - R);
  g.head_tok.noalias() += tr.y.transpose() * dz;
  Mat<T> dy = dz * p.head_tok.transpose();
  const T sim_scale = T(1) / std::sqrt(static_cast<T>(cfg.d_model));
  for (int r = 0; r < n; ++r) {
    const int a0 = b.anchor_offset[r];
    const int k = std::min(b.anchor_offset[r + 1] - a0, R);
    for (int i = 0; i < k; ++i) {
      const T gl = dlogits(r, first + i) * sim_scale;
      if (gl == T(0))
        continue;
      const int a = b.anchor_row[a0 + i];
      dy.row(r) += gl * tr.y.row(a);
      dy.row(a) += gl * tr.y.row(r);
    }
  }
  if (P > 0) {
    g.head_prop.noalias() += tr.y.transpose() * dprops;
    dy.noalias() += dprops * p.head_prop.transpose();
  }

  Mat<T> dx = norm_backward(dy, tr.nf, p.final_g, cfg.legacy_arch, g.final_g,
                            cfg.legacy_arch ? &g.final_b : nullptr);

  const RopeTable<T> rope(cfg);
  const int H = cfg.n_heads;
  const int dh = cfg.head_dim();
  const T scale = T(1) / std::sqrt(static_cast<T>(dh));
  for (int l = cfg.n_layers - 1; l >= 0; --l) {
    const LayerParams<T> &L = p.layers[l];
    LayerParams<T> &G = g.layers[l];
    const LayerTrace<T> &lt = tr.layers[l];

    // Feed-forward block.
    G.w_down.noalias() += lt.f.transpose() * dx;
    const Mat<T> df = dx * L.w_down.transpose();
    Mat<T> dh2;
    if (cfg.legacy_arch) {
      const Mat<T> du =
          (df.array() * lt.u.unaryExpr([](T v) { return gelu_grad(v); }).array())
              .matrix();
      G.w_up.noalias() += lt.h2.transpose() * du;
      dh2 = du * L.w_up.transpose();
    } else {
      const Mat<T> du =
          (df.array() * lt.a.unaryExpr([](T v) { return silu(v); }).array())
              .matrix();
      const Mat<T> da = (df.array() * lt.u.array() *
                         lt.a.unaryExpr([](T v) { return silu_grad(v); }).array())
                            .matrix();
      G.w_up.noalias() += lt.h2.transpose() * du;
      G.w_gate.noalias() += lt.h2.transpose() * da;
      dh2 = du * L.w_up.transpose() + da * L.w_gate.transpose();
    }
    Mat<T> dx_mid = dx + norm_backward(dh2, lt.n2, L.norm2_g, cfg.legacy_arch,
                                       G.norm2_g,
                                       cfg.legacy_arch ? &G.norm2_b : nullptr);

    // Attention block.
    G.wo.noalias() += lt.att.transpose() * dx_mid;
    const Mat<T> datt = dx_mid * L.wo.transpose();
    Mat<T> dq = Mat<T>::Zero(n, cfg.d_model);
    Mat<T> dk = Mat<T>::Zero(n, cfg.d_model);
    Mat<T> dv = Mat<T>::Zero(n, cfg.d_model);
    int pi = 0;
    for (int s = 0; s < b.seq_count(); ++s) {
      const int o = b.offset[s];
      const int len = b.offset[s + 1] - o;
      for (int h = 0; h < H; ++h, ++pi) {
        const Mat<T> &Pm = lt.probs[pi];
        const auto dO = datt.block(o, h * dh, len, dh);
        dv.block(o, h * dh, len, dh) = Pm.transpose() * dO;
        const Mat<T> dP = dO * lt.v.block(o, h * dh, len, dh).transpose();
        Mat<T> dS = (Pm.array() *
                     (dP.array().colwise() -
                      (dP.array() * Pm.array()).rowwise().sum()))
                        .matrix() *
                    scale;
        dq.block(o, h * dh, len, dh) = dS * lt.k.block(o, h * dh, len, dh);
        dk.block(o, h * dh, len, dh) =
            dS.transpose() * lt.q.block(o, h * dh, len, dh);
      }
    }
    if (!cfg.legacy_arch)
      for (int r = 0; r < n; ++r) {
        rope_rotate<T>(dq.row(r), tr.pos_of_row[r], H, dh, true, rope.cos, rope.sin);
        rope_rotate<T>(dk.row(r), tr.pos_of_row[r], H, dh, true, rope.cos, rope.sin);
      }
    G.wq.noalias() += lt.h1.transpose() * dq;
    G.wk.noalias() += lt.h1.transpose() * dk;
    G.wv.noalias() += lt.h1.transpose() * dv;
    const Mat<T> dh1 = dq * L.wq.transpose() + dk * L.wk.transpose() +
                       dv * L.wv.transpose();
    dx = dx_mid + norm_backward(dh1, lt.n1, L.norm1_g, cfg.legacy_arch,
                                G.norm1_g,
                                cfg.legacy_arch ? &G.norm1_b : nullptr);
  }

  // Embeddings.
  Mat<T> dpenc = Mat<T>::Zero(b.seq_count(), cfg.d_model);
  for (int r = 0; r < n; ++r) {
    g.tok_emb.row(b.tokens[r]) += dx.row(r);
    g.ring_emb.row(b.ring_count[r]) += dx.row(r);
    if (cfg.legacy_arch)
      g.pos_emb.row(tr.pos_of_row[r]) += dx.row(r);
    dpenc.row(tr.seq_of_row[r]) += dx.row(r);
  }
  for (int s = 0; s < b.seq_count(); ++s)
    for (std::size_t j = 0; j < cfg.cardinalities.size(); ++j)
      g.cat_emb[j].row(category_row<T>(cfg, b.cond[s], static_cast<int>(j))) +=
          dpenc.row(s);
  if (C > 0) {
    if (cfg.single_layer_prop_encoder) {
      g.prop_w1.noalias() += tr.u_in.transpose() * dpenc;
    } else {
      g.prop_w2.noalias() += tr.a_mlp.transpose() * dpenc;
      const Mat<T> da = dpenc * p.prop_w2.transpose();
      const Mat<T> dhm =
          (da.array() *
           tr.h_mlp.unaryExpr([](T v) { return silu_grad(v); }).array())
              .matrix();
      g.prop_w1.noalias() += tr.u_in.transpose() * dhm;
    }
  }
  return out;
}

// ---- incremental inference ---------------------------------------------------

InferenceSession::InferenceSession(const ModelParams<float> &p,
                                   const ModelConfig &cfg, const Vocab &v,
                                   const PropertyVector &cond)
    : p_(p), cfg_(cfg), v_(v) {
  if (v.size() != cfg.vocab_size || v.r_max() != cfg.r_max)
    throw ArgumentError("vocabulary does not match the model");
  penc_ = encode_properties(p, cfg, cond);
  for (int l = 0; l < cfg.n_layers; ++l) {
    k_cache_.emplace_back(cfg.max_len, cfg.d_model);
    v_cache_.emplace_back(cfg.max_len, cfg.d_model);
  }
  y_hist_.resize(cfg.max_len, cfg.d_model);
  RopeTable<float> rope(cfg);
  rope_cos_ = std::move(rope.cos);
  rope_sin_ = std::move(rope.sin);
}

void InferenceSession::push(int token) {
  if (len_ >= cfg_.max_len)
    throw ArgumentError("sequence exceeds max_len");
  if (token < 0 || token >= cfg_.vocab_size)
    throw ArgumentError("token id outside the model vocabulary");
  track_.push(token, v_);
  const int pos = len_;
  const int H = cfg_.n_heads;
  const int dh = cfg_.head_dim();
  const float scale = 1.0f / std::sqrt(static_cast<float>(dh));

  Mat<float> x(1, cfg_.d_model);
  x.row(0) = p_.tok_emb.row(token) +
             p_.ring_emb.row(std::min(track_.open_count(pos), cfg_.r_max)) +
             penc_;
  if (cfg_.legacy_arch)
    x.row(0) += p_.pos_emb.row(pos);

  Mat<float> h, q, k, vv, att(1, cfg_.d_model);
  for (int l = 0; l < cfg_.n_layers; ++l) {
    const LayerParams<float> &L = p_.layers[l];
    norm_forward<float>(x, L.norm1_g, L.norm1_b, cfg_.legacy_arch,
                        cfg_.norm_eps, h, nullptr);
    q = h * L.wq;
    k = h * L.wk;
    vv = h * L.wv;
    if (!cfg_.legacy_arch) {
      rope_rotate<float>(q.row(0), pos, H, dh, false, rope_cos_, rope_sin_);
      rope_rotate<float>(k.row(0), pos, H, dh, false, rope_cos_, rope_sin_);
    }
    k_cache_[l].row(pos) = k.row(0);
    v_cache_[l].row(pos) = vv.row(0);
    for (int hd = 0; hd < H; ++hd) {
      const auto K = k_cache_[l].block(0, hd * dh, pos + 1, dh);
      const auto Vb = v_cache_[l].block(0, hd * dh, pos + 1, dh);
      RowVec<float> s = (q.block(0, hd * dh, 1, dh) * K.transpose()) * scale;
      const float m = s.maxCoeff();
      s = (s.array() - m).exp().matrix();
      s /= s.sum();
      att.block(0, hd * dh, 1, dh) = s * Vb;
    }
    x += att * L.wo;
    norm_forward<float>(x, L.norm2_g, L.norm2_b, cfg_.legacy_arch,
                        cfg_.norm_eps, h, nullptr);
    Mat<float> f;
    if (cfg_.legacy_arch) {
      f = (h * L.w_up).unaryExpr([](float v) { return gelu(v); });
    } else {
      const Mat<float> a = h * L.w_gate;
      f = (a.unaryExpr([](float v) { return silu(v); }).array() *
           (h * L.w_up).array())
              .matrix();
    }
    x += f * L.w_down;
  }
  Mat<float> y;
  norm_forward<float>(x, p_.final_g, p_.final_b, cfg_.legacy_arch,
                      cfg_.norm_eps, y, nullptr);
  y_hist_.row(pos) = y.row(0);

  const int first = Vocab::kFirstRingClose;
  const int R = cfg_.r_max;
  const RowVec<float> z = y * p_.head_tok;
  logits_.resize(cfg_.vocab_size);
  logits_.head(first) = z.head(first);
  logits_.tail(cfg_.vocab_size - first - R) = z.tail(cfg_.head_tokens() - first);
  logits_.segment(first, R).setConstant(neg_inf<float>());
  const float sim_scale = 1.0f / std::sqrt(static_cast<float>(cfg_.d_model));
  const auto anchors = track_.anchor_positions(pos);
  for (int i = 0; i < std::min<int>(static_cast<int>(anchors.size()), R); ++i)
    logits_(first + i) = y.row(0).dot(y_hist_.row(anchors[i])) * sim_scale;
  if (cfg_.property_outputs() > 0)
    props_ = y * p_.head_prop;
  else
    props_.resize(0);
  ++len_;
}

PropertyVector decode_property_row(const ModelConfig &cfg,
                                   const RowVec<float> &row) {
  PropertyVector pv;
  for (int i = 0; i < cfg.n_continuous; ++i) {
    pv.value.push_back(row(i));
    pv.missing.push_back(0);
  }
  int col = cfg.n_continuous;
  for (int card: cfg.cardinalities) {
    Eigen::Index best = 0;
    row.segment(col, card).maxCoeff(&best);
    pv.category.push_back(static_cast<int>(best));
    col += card;
  }
  return pv;
}

#define STGG_INSTANTIATE(T)                                                    \
  template struct ModelParams<T>;                                              \
  template ModelParams<T> init_params<T>(const ModelConfig &, Rng &);          \
  template ForwardOutput<T> forward<T>(const ModelParams<T> &,                 \
                                       const ModelConfig &, const Batch &);    \
  template LossParts loss_and_grad<T>(const ModelParams<T> &,                  \
                                      const ModelConfig &, const Batch &,      \
                                      double, ModelParams<T> *);               \
  template RowVec<T> encode_properties<T>(                                     \
      const ModelParams<T> &, const ModelConfig &, const PropertyVector &);  \
  template Mat<T> rms_norm<T>(const Mat<T> &, const Mat<T> &, double);         \
  template void rotary_encode<T>(Mat<T> &, std::span<const int>, int, double);

STGG_INSTANTIATE(float)
STGG_INSTANTIATE(double)

}  // namespace stgg
