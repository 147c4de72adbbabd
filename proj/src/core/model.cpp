/* Copyright 2026 The tabinv Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "error.hpp"
#include "rng.hpp"

namespace tabinv {

namespace {

// Logit given to disallowed pairs. exp() of it underflows to exactly zero
// after max-subtraction, so masked probabilities and their gradients are 0.
constexpr double kMaskedLogit = -1e9;
constexpr double kNormEps = 1e-6;

using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

struct AttnParams {
  std::size_t q, k, v, o;
};

struct FfParams {
  std::size_t w1, b1, w2, b2;
};

struct EncLayerParams {
  std::size_t ln1;
  AttnParams attn;
  std::size_t ln2;
  FfParams ff;
};

struct DecLayerParams {
  std::size_t ln1;
  AttnParams self;
  std::size_t ln2;
  AttnParams cross;
  std::size_t ln3;
  FfParams ff;
};

struct Layout {
  std::size_t embed;
  std::size_t enc_bias;
  std::size_t dec_bias;
  std::vector<EncLayerParams> enc;
  std::size_t enc_final;
  std::vector<DecLayerParams> dec;
  std::size_t dec_final;
};

Layout make_layout(const ModelConfig& cfg) {
  Layout l{};
  std::size_t next = 0;
  l.embed = next++;
  l.enc_bias = next++;
  l.dec_bias = next++;
  for (std::size_t i = 0; i < cfg.n_enc_layers; ++i) {
    EncLayerParams p{};
    p.ln1 = next++;
    p.attn = {next, next + 1, next + 2, next + 3};
    next += 4;
    p.ln2 = next++;
    p.ff = {next, next + 1, next + 2, next + 3};
    next += 4;
    l.enc.push_back(p);
  }
  l.enc_final = next++;
  for (std::size_t i = 0; i < cfg.n_dec_layers; ++i) {
    DecLayerParams p{};
    p.ln1 = next++;
    p.self = {next, next + 1, next + 2, next + 3};
    next += 4;
    p.ln2 = next++;
    p.cross = {next, next + 1, next + 2, next + 3};
    next += 4;
    p.ln3 = next++;
    p.ff = {next, next + 1, next + 2, next + 3};
    next += 4;
    l.dec.push_back(p);
  }
  l.dec_final = next++;
  return l;
}

// Names and shapes in layout order.
std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>>
parameter_shapes(const ModelConfig& cfg) {
  const std::size_t d = cfg.d_model;
  const std::size_t ff = cfg.d_ff;
  const std::size_t bias = static_cast<std::size_t>(cfg.p_max) + 1;
  std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> s;
  s.push_back({"embed", {cfg.vocab_size, d}});
  s.push_back({"enc.rel_bias", {cfg.n_heads, bias}});
  s.push_back({"dec.rel_bias", {cfg.n_heads, bias}});
  auto attn = [&](const std::string& prefix) {
    for (const char* w : {"q", "k", "v", "o"}) {
      s.push_back({prefix + "." + w, {d, d}});
    }
  };
  auto feed_forward = [&](const std::string& prefix) {
    s.push_back({prefix + ".w1", {d, ff}});
    s.push_back({prefix + ".b1", {1, ff}});
    s.push_back({prefix + ".w2", {ff, d}});
    s.push_back({prefix + ".b2", {1, d}});
  };
  for (std::size_t i = 0; i < cfg.n_enc_layers; ++i) {
    const std::string p = "enc." + std::to_string(i);
    s.push_back({p + ".ln1", {1, d}});
    attn(p + ".attn");
    s.push_back({p + ".ln2", {1, d}});
    feed_forward(p + ".ff");
  }
  s.push_back({"enc.final_ln", {1, d}});
  for (std::size_t i = 0; i < cfg.n_dec_layers; ++i) {
    const std::string p = "dec." + std::to_string(i);
    s.push_back({p + ".ln1", {1, d}});
    attn(p + ".self");
    s.push_back({p + ".ln2", {1, d}});
    attn(p + ".cross");
    s.push_back({p + ".ln3", {1, d}});
    feed_forward(p + ".ff");
  }
  s.push_back({"dec.final_ln", {1, d}});
  return s;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

ParameterSet init_parameters(const ModelConfig& cfg) {
  Rng rng(cfg.seed);
  ParameterSet p;
  for (const auto& [name, shape] : parameter_shapes(cfg)) {
    Matrix m(shape.first, shape.second);
    double stddev = 0.0;
    double fill = 0.0;
    if (name == "embed") {
      stddev = 1.0;
    } else if (ends_with(name, "rel_bias")) {
      stddev = 0.1;
    } else if (ends_with(name, "ln1") || ends_with(name, "ln2") ||
               ends_with(name, "ln3") || ends_with(name, "final_ln")) {
      fill = 1.0;
    } else if (ends_with(name, ".b1") || ends_with(name, ".b2")) {
      fill = 0.0;
    } else {
      stddev = 1.0 / std::sqrt(static_cast<double>(shape.first));
    }
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      m.data()[i] = stddev > 0.0 ? stddev * rng.normal() : fill;
    }
    p.names.push_back(name);
    p.tensors.push_back(std::move(m));
  }
  return p;
}

// ---------------------------------------------------------------- RMS norm

struct NormCache {
  Matrix x;
  Eigen::VectorXd inv_rms;
};

Matrix norm_forward(const Matrix& x, const Matrix& gain, NormCache* cache) {
  const auto d = static_cast<double>(x.cols());
  Eigen::VectorXd inv(x.rows());
  Matrix y(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    inv(r) = 1.0 / std::sqrt(x.row(r).squaredNorm() / d + kNormEps);
    y.row(r) = x.row(r).cwiseProduct(gain.row(0)) * inv(r);
  }
  if (cache) {
    cache->x = x;
    cache->inv_rms = std::move(inv);
  }
  return y;
}

Matrix norm_backward(const NormCache& c, const Matrix& gain, const Matrix& dy,
                     Matrix& dgain) {
  const auto d = static_cast<double>(c.x.cols());
  Matrix dx(c.x.rows(), c.x.cols());
  for (Eigen::Index r = 0; r < c.x.rows(); ++r) {
    const double inv = c.inv_rms(r);
    dgain.row(0) += dy.row(r).cwiseProduct(c.x.row(r)) * inv;
    const RowVector g = dy.row(r).cwiseProduct(gain.row(0));
    const double dot = g.dot(c.x.row(r));
    dx.row(r) = g * inv - c.x.row(r) * (dot * inv * inv * inv / d);
  }
  return dx;
}

// ------------------------------------------------------------- attention

struct AttnSpec {
  const std::vector<std::uint8_t>* allowed = nullptr;  // row-major Lq x Lk
  bool causal = false;
  const std::vector<int>* bias_index = nullptr;  // row-major Lq x Lk
  std::size_t bias_table = 0;                    // parameter index
};

struct AttnCache {
  Matrix xq;
  Matrix xkv;
  Matrix q, k, v;
  Matrix concat;
  std::vector<Matrix> probs;
};

// Masked entries come out as exact zeros; the vectorized exp would otherwise
// leave denormals behind.
void masked_softmax_rows(Matrix& s) {
  constexpr double kCutoff = kMaskedLogit / 2;
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    const double m = s.row(r).maxCoeff();
    s.row(r) = (s.row(r).array() <= kCutoff)
                   .select(0.0, (s.row(r).array() - m).exp());
    s.row(r) /= s.row(r).sum();
  }
}

Matrix attn_forward(const ModelConfig& cfg, const ParameterSet& p,
                    const AttnParams& w, const AttnSpec& spec,
                    const Matrix& xq, const Matrix& xkv, AttnCache* cache) {
  const auto heads = static_cast<Eigen::Index>(cfg.n_heads);
  const auto dh = static_cast<Eigen::Index>(cfg.d_model / cfg.n_heads);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const Eigen::Index lq = xq.rows();
  const Eigen::Index lk = xkv.rows();

  Matrix q = xq * p.tensors[w.q];
  Matrix k = xkv * p.tensors[w.k];
  Matrix v = xkv * p.tensors[w.v];
  Matrix concat(lq, xq.cols());
  std::vector<Matrix> probs;
  if (cache) probs.reserve(static_cast<std::size_t>(heads));

  for (Eigen::Index h = 0; h < heads; ++h) {
    Matrix s = q.middleCols(h * dh, dh) * k.middleCols(h * dh, dh).transpose();
    s *= scale;
    if (spec.bias_index) {
      const Matrix& table = p.tensors[spec.bias_table];
      for (Eigen::Index i = 0; i < lq; ++i) {
        for (Eigen::Index j = 0; j < lk; ++j) {
          s(i, j) += table(h, (*spec.bias_index)[i * lk + j]);
        }
      }
    }
    for (Eigen::Index i = 0; i < lq; ++i) {
      for (Eigen::Index j = 0; j < lk; ++j) {
        const bool blocked = (spec.causal && j > i) ||
                             (spec.allowed && !(*spec.allowed)[i * lk + j]);
        if (blocked) s(i, j) = kMaskedLogit;
      }
    }
    masked_softmax_rows(s);
    concat.middleCols(h * dh, dh) = s * v.middleCols(h * dh, dh);
    if (cache) probs.push_back(std::move(s));
  }
  Matrix out = concat * p.tensors[w.o];
  if (cache) {
    cache->xq = xq;
    cache->xkv = xkv;
    cache->q = std::move(q);
    cache->k = std::move(k);
    cache->v = std::move(v);
    cache->concat = std::move(concat);
    cache->probs = std::move(probs);
  }
  return out;
}

void attn_backward(const ModelConfig& cfg, const ParameterSet& p,
                   ParameterSet& g, const AttnParams& w, const AttnSpec& spec,
                   const AttnCache& c, const Matrix& dout, Matrix& dxq,
                   Matrix& dxkv) {
  const auto heads = static_cast<Eigen::Index>(cfg.n_heads);
  const auto dh = static_cast<Eigen::Index>(cfg.d_model / cfg.n_heads);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const Eigen::Index lq = c.xq.rows();
  const Eigen::Index lk = c.xkv.rows();

  g.tensors[w.o].noalias() += c.concat.transpose() * dout;
  const Matrix dconcat = dout * p.tensors[w.o].transpose();

  Matrix dq(lq, c.q.cols());
  Matrix dk(lk, c.k.cols());
  Matrix dv(lk, c.v.cols());
  for (Eigen::Index h = 0; h < heads; ++h) {
    const Matrix& a = c.probs[static_cast<std::size_t>(h)];
    const Matrix doh = dconcat.middleCols(h * dh, dh);
    const Matrix da = doh * c.v.middleCols(h * dh, dh).transpose();
    dv.middleCols(h * dh, dh) = a.transpose() * doh;
    Matrix ds(lq, lk);
    for (Eigen::Index i = 0; i < lq; ++i) {
      const double dot = da.row(i).dot(a.row(i));
      ds.row(i) = a.row(i).cwiseProduct((da.row(i).array() - dot).matrix());
    }
    if (spec.bias_index) {
      Matrix& table = g.tensors[spec.bias_table];
      for (Eigen::Index i = 0; i < lq; ++i) {
        for (Eigen::Index j = 0; j < lk; ++j) {
          table(h, (*spec.bias_index)[i * lk + j]) += ds(i, j);
        }
      }
    }
    dq.middleCols(h * dh, dh) = ds * c.k.middleCols(h * dh, dh) * scale;
    dk.middleCols(h * dh, dh) =
        ds.transpose() * c.q.middleCols(h * dh, dh) * scale;
  }
  g.tensors[w.q].noalias() += c.xq.transpose() * dq;
  g.tensors[w.k].noalias() += c.xkv.transpose() * dk;
  g.tensors[w.v].noalias() += c.xkv.transpose() * dv;
  dxq = dq * p.tensors[w.q].transpose();
  dxkv = dk * p.tensors[w.k].transpose() + dv * p.tensors[w.v].transpose();
}

// ---------------------------------------------------------- feed-forward

struct FfCache {
  Matrix x;
  Matrix hidden;  // after ReLU
};

Matrix ff_forward(const ParameterSet& p, const FfParams& w, const Matrix& x,
                  FfCache* cache) {
  Matrix h = x * p.tensors[w.w1];
  h.rowwise() += p.tensors[w.b1].row(0);
  h = h.cwiseMax(0.0);
  Matrix out = h * p.tensors[w.w2];
  out.rowwise() += p.tensors[w.b2].row(0);
  if (cache) {
    cache->x = x;
    cache->hidden = std::move(h);
  }
  return out;
}

Matrix ff_backward(const ParameterSet& p, ParameterSet& g, const FfParams& w,
                   const FfCache& c, const Matrix& dout) {
  g.tensors[w.w2].noalias() += c.hidden.transpose() * dout;
  g.tensors[w.b2].row(0) += dout.colwise().sum();
  Matrix dh = dout * p.tensors[w.w2].transpose();
  dh = (c.hidden.array() > 0.0).select(dh, 0.0);
  g.tensors[w.w1].noalias() += c.x.transpose() * dh;
  g.tensors[w.b1].row(0) += dh.colwise().sum();
  return dh * p.tensors[w.w1].transpose();
}

// ------------------------------------------------------ encoder/decoder

struct EncLayerCache {
  NormCache n1;
  AttnCache attn;
  NormCache n2;
  FfCache ff;
};

struct EncoderCache {
  std::vector<TokenId> tokens;
  std::vector<EncLayerCache> layers;
  NormCache final_norm;
};

struct DecLayerCache {
  NormCache n1;
  AttnCache self;
  NormCache n2;
  AttnCache cross;
  NormCache n3;
  FfCache ff;
};

struct DecoderCache {
  std::vector<TokenId> tokens;
  std::vector<DecLayerCache> layers;
  NormCache final_norm;
};

Matrix embed(const ParameterSet& p, std::size_t table,
             std::span<const TokenId> tokens, std::size_t vocab_size) {
  const Matrix& e = p.tensors[table];
  Matrix x(static_cast<Eigen::Index>(tokens.size()), e.cols());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] < 0 || static_cast<std::size_t>(tokens[i]) >= vocab_size) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "token id " + std::to_string(tokens[i]) +
                      " outside the model vocabulary");
    }
    x.row(static_cast<Eigen::Index>(i)) = e.row(tokens[i]);
  }
  return x;
}

class Network {
 public:
  Network(const ModelConfig& cfg, const ParameterSet& p)
      : cfg_(cfg), p_(p), layout_(make_layout(cfg)) {}

  // Structure tables live in the input; returned spec points into `input`.
  AttnSpec encoder_spec(const EncoderInput& input,
                        std::vector<int>& linear_storage) const {
    AttnSpec spec;
    if (cfg_.use_structure_mask) spec.allowed = &input.mask.data();
    if (cfg_.use_invariant_relpos) {
      spec.bias_index = &input.relpos.data();
    } else {
      linear_storage = linear_relpos(input.tokens.size(), cfg_.p_max).data();
      spec.bias_index = &linear_storage;
    }
    spec.bias_table = layout_.enc_bias;
    return spec;
  }

  void check_input(const EncoderInput& input) const {
    const std::size_t n = input.tokens.size();
    if (n == 0) {
      throw Error(ErrorCode::kDimensionMismatch, "empty encoder input");
    }
    if (input.mask.size() != n || input.relpos.size() != n) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "structure matrices do not match the input length");
    }
    if (input.relpos.p_max() != cfg_.p_max) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "relative positions built for a different p_max");
    }
  }

  Matrix encode(const EncoderInput& input, EncoderCache* cache,
                std::size_t trace_layer = static_cast<std::size_t>(-1),
                std::vector<Matrix>* trace = nullptr) const {
    check_input(input);
    std::vector<int> linear;
    const AttnSpec spec = encoder_spec(input, linear);
    Matrix x = embed(p_, layout_.embed, input.tokens, cfg_.vocab_size);
    if (cache) {
      cache->tokens = input.tokens;
      cache->layers.resize(layout_.enc.size());
    }
    for (std::size_t l = 0; l < layout_.enc.size(); ++l) {
      const EncLayerParams& w = layout_.enc[l];
      EncLayerCache* lc = cache ? &cache->layers[l] : nullptr;
      AttnCache local;
      AttnCache* ac = lc ? &lc->attn : (l == trace_layer ? &local : nullptr);
      const Matrix a = norm_forward(x, p_.tensors[w.ln1], lc ? &lc->n1 : nullptr);
      x += attn_forward(cfg_, p_, w.attn, spec, a, a, ac);
      if (trace && l == trace_layer) *trace = ac->probs;
      const Matrix b = norm_forward(x, p_.tensors[w.ln2], lc ? &lc->n2 : nullptr);
      x += ff_forward(p_, w.ff, b, lc ? &lc->ff : nullptr);
    }
    return norm_forward(x, p_.tensors[layout_.enc_final],
                        cache ? &cache->final_norm : nullptr);
  }

  // Decoder hidden states after the final norm.
  Matrix decode(const Matrix& memory, std::span<const TokenId> tokens,
                DecoderCache* cache,
                std::size_t trace_layer = static_cast<std::size_t>(-1),
                std::vector<Matrix>* trace = nullptr) const {
    const std::vector<int> self_index =
        linear_relpos(tokens.size(), cfg_.p_max).data();
    AttnSpec self_spec;
    self_spec.causal = true;
    self_spec.bias_index = &self_index;
    self_spec.bias_table = layout_.dec_bias;
    const AttnSpec cross_spec;

    Matrix y = embed(p_, layout_.embed, tokens, cfg_.vocab_size);
    if (cache) {
      cache->tokens.assign(tokens.begin(), tokens.end());
      cache->layers.resize(layout_.dec.size());
    }
    for (std::size_t l = 0; l < layout_.dec.size(); ++l) {
      const DecLayerParams& w = layout_.dec[l];
      DecLayerCache* lc = cache ? &cache->layers[l] : nullptr;
      AttnCache local;
      AttnCache* sc = lc ? &lc->self : (l == trace_layer ? &local : nullptr);
      const Matrix a = norm_forward(y, p_.tensors[w.ln1], lc ? &lc->n1 : nullptr);
      y += attn_forward(cfg_, p_, w.self, self_spec, a, a, sc);
      if (trace && l == trace_layer) *trace = sc->probs;
      const Matrix c = norm_forward(y, p_.tensors[w.ln2], lc ? &lc->n2 : nullptr);
      y += attn_forward(cfg_, p_, w.cross, cross_spec, c, memory,
                        lc ? &lc->cross : nullptr);
      const Matrix e = norm_forward(y, p_.tensors[w.ln3], lc ? &lc->n3 : nullptr);
      y += ff_forward(p_, w.ff, e, lc ? &lc->ff : nullptr);
    }
    return norm_forward(y, p_.tensors[layout_.dec_final],
                        cache ? &cache->final_norm : nullptr);
  }

  double logit_scale() const {
    return 1.0 / std::sqrt(static_cast<double>(cfg_.d_model));
  }

  Matrix logits(const Matrix& hidden) const {
    return hidden * p_.tensors[layout_.embed].transpose() * logit_scale();
  }

  // Returns d(loss)/d(memory) contribution and accumulates decoder grads.
  Matrix decoder_backward(const DecoderCache& c, const Matrix& dhidden,
                          ParameterSet& g) const {
    Matrix dy = norm_backward(c.final_norm, p_.tensors[layout_.dec_final],
                              dhidden, g.tensors[layout_.dec_final]);
    const std::vector<int> self_index =
        linear_relpos(c.tokens.size(), cfg_.p_max).data();
    AttnSpec self_spec;
    self_spec.causal = true;
    self_spec.bias_index = &self_index;
    self_spec.bias_table = layout_.dec_bias;
    const AttnSpec cross_spec;

    Matrix dmemory;
    for (std::size_t l = layout_.dec.size(); l-- > 0;) {
      const DecLayerParams& w = layout_.dec[l];
      const DecLayerCache& lc = c.layers[l];
      // feed-forward block
      Matrix de = ff_backward(p_, g, w.ff, lc.ff, dy);
      dy += norm_backward(lc.n3, p_.tensors[w.ln3], de, g.tensors[w.ln3]);
      // cross-attention block
      Matrix dc, dmem;
      attn_backward(cfg_, p_, g, w.cross, cross_spec, lc.cross, dy, dc, dmem);
      if (dmemory.size() == 0) {
        dmemory = dmem;
      } else {
        dmemory += dmem;
      }
      dy += norm_backward(lc.n2, p_.tensors[w.ln2], dc, g.tensors[w.ln2]);
      // self-attention block
      Matrix dq, dkv;
      attn_backward(cfg_, p_, g, w.self, self_spec, lc.self, dy, dq, dkv);
      dy += norm_backward(lc.n1, p_.tensors[w.ln1], Matrix(dq + dkv),
                          g.tensors[w.ln1]);
    }
    scatter_embedding(c.tokens, dy, g);
    return dmemory;
  }

  void encoder_backward(const EncoderInput& input, const EncoderCache& c,
                        const Matrix& dmemory, ParameterSet& g) const {
    std::vector<int> linear;
    const AttnSpec spec = encoder_spec(input, linear);
    Matrix dx = norm_backward(c.final_norm, p_.tensors[layout_.enc_final],
                              dmemory, g.tensors[layout_.enc_final]);
    for (std::size_t l = layout_.enc.size(); l-- > 0;) {
      const EncLayerParams& w = layout_.enc[l];
      const EncLayerCache& lc = c.layers[l];
      Matrix db = ff_backward(p_, g, w.ff, lc.ff, dx);
      dx += norm_backward(lc.n2, p_.tensors[w.ln2], db, g.tensors[w.ln2]);
      Matrix dq, dkv;
      attn_backward(cfg_, p_, g, w.attn, spec, lc.attn, dx, dq, dkv);
      dx += norm_backward(lc.n1, p_.tensors[w.ln1], Matrix(dq + dkv),
                          g.tensors[w.ln1]);
    }
    scatter_embedding(c.tokens, dx, g);
  }

  void scatter_embedding(std::span<const TokenId> tokens, const Matrix& dx,
                         ParameterSet& g) const {
    Matrix& de = g.tensors[layout_.embed];
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      de.row(tokens[i]) += dx.row(static_cast<Eigen::Index>(i));
    }
  }

  const Layout& layout() const { return layout_; }

 private:
  const ModelConfig& cfg_;
  const ParameterSet& p_;
  Layout layout_;
};

Matrix log_softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double m = logits.row(r).maxCoeff();
    const double lse =
        m + std::log((logits.row(r).array() - m).exp().sum());
    out.row(r) = logits.row(r).array() - lse;
  }
  return out;
}

}  // namespace

// ------------------------------------------------------------ public API

void ModelConfig::validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, what);
  };
  if (d_model == 0 || n_heads == 0) fail("d_model and n_heads must be positive");
  if (d_model % n_heads != 0) fail("d_model must be divisible by n_heads");
  if (d_ff == 0) fail("d_ff must be positive");
  if (p_max < 1) {
    throw Error(ErrorCode::kInvalidPMax, "p_max must be at least 1");
  }
  if (vocab_size == 0) fail("vocab_size must be positive");
}

std::size_t ParameterSet::count() const {
  std::size_t n = 0;
  for (const Matrix& m : tensors) n += static_cast<std::size_t>(m.size());
  return n;
}

ParameterSet ParameterSet::zeros_like() const {
  ParameterSet out;
  out.names = names;
  for (const Matrix& m : tensors) {
    out.tensors.push_back(Matrix::Zero(m.rows(), m.cols()));
  }
  return out;
}

void ParameterSet::set_zero() {
  for (Matrix& m : tensors) m.setZero();
}

bool ParameterSet::all_finite() const {
  for (const Matrix& m : tensors) {
    if (!m.allFinite()) return false;
  }
  return true;
}

std::size_t ParameterSet::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  throw Error(ErrorCode::kInvalidArgument, "no parameter named " + name);
}

EncoderInput make_encoder_input(const LinearizedSequence& seq, int p_max) {
  return EncoderInput{seq.token_ids, build_mask(seq), build_relpos(seq, p_max)};
}

TrainingExample make_training_example(const LinearizedSequence& seq,
                                      std::vector<TokenId> target_ids,
                                      int p_max) {
  if (target_ids.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "target must hold BOS and at least one more token");
  }
  return TrainingExample{make_encoder_input(seq, p_max), std::move(target_ids)};
}

ToyModel::ToyModel(const ModelConfig& config) : config_(config) {
  config_.validate();
  params_ = init_parameters(config_);
}

ToyModel::ToyModel(const ModelConfig& config, ParameterSet params)
    : config_(config), params_(std::move(params)) {
  config_.validate();
  const auto shapes = parameter_shapes(config_);
  if (shapes.size() != params_.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "parameter count does not match the configuration");
  }
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const auto& [name, shape] = shapes[i];
    const Matrix& m = params_.tensors[i];
    if (params_.names[i] != name ||
        static_cast<std::size_t>(m.rows()) != shape.first ||
        static_cast<std::size_t>(m.cols()) != shape.second) {
      std::ostringstream msg;
      msg << "parameter " << i << " expected " << name << " [" << shape.first
          << "x" << shape.second << "], got " << params_.names[i] << " ["
          << m.rows() << "x" << m.cols() << "]";
      throw Error(ErrorCode::kDimensionMismatch, msg.str());
    }
  }
  if (!params_.all_finite()) {
    throw Error(ErrorCode::kNonFiniteLoss, "parameters are not finite");
  }
}

Matrix ToyModel::encode(const EncoderInput& input) const {
  return Network(config_, params_).encode(input, nullptr);
}

std::vector<Matrix> ToyModel::encoder_attention(const EncoderInput& input,
                                                std::size_t layer) const {
  if (layer >= config_.n_enc_layers) {
    throw Error(ErrorCode::kOutOfRange, "encoder layer out of range");
  }
  std::vector<Matrix> trace;
  Network(config_, params_).encode(input, nullptr, layer, &trace);
  return trace;
}

Matrix ToyModel::decoder_logits(const Matrix& memory,
                                std::span<const TokenId> decoder_tokens) const {
  const Network net(config_, params_);
  return net.logits(net.decode(memory, decoder_tokens, nullptr));
}

std::vector<Matrix> ToyModel::decoder_self_attention(
    const Matrix& memory, std::span<const TokenId> decoder_tokens,
    std::size_t layer) const {
  if (layer >= config_.n_dec_layers) {
    throw Error(ErrorCode::kOutOfRange, "decoder layer out of range");
  }
  std::vector<Matrix> trace;
  Network(config_, params_).decode(memory, decoder_tokens, nullptr, layer,
                                   &trace);
  return trace;
}

double ToyModel::example_loss(const TrainingExample& ex, ParameterSet* grads,
                              double scale) const {
  if (ex.target_ids.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "target too short");
  }
  const Network net(config_, params_);
  const std::span<const TokenId> target(ex.target_ids);
  const std::span<const TokenId> dec_in = target.first(target.size() - 1);
  const std::span<const TokenId> gold = target.subspan(1);

  EncoderCache enc_cache;
  DecoderCache dec_cache;
  const Matrix memory = net.encode(ex.input, grads ? &enc_cache : nullptr);
  const Matrix hidden = net.decode(memory, dec_in, grads ? &dec_cache : nullptr);
  const Matrix logits = net.logits(hidden);
  const Matrix logp = log_softmax_rows(logits);

  double loss = 0.0;
  for (std::size_t t = 0; t < gold.size(); ++t) {
    if (gold[t] < 0 || static_cast<std::size_t>(gold[t]) >= config_.vocab_size) {
      throw Error(ErrorCode::kDimensionMismatch, "target id out of range");
    }
    loss -= logp(static_cast<Eigen::Index>(t), gold[t]);
  }
  if (!grads) return loss;

  // d(loss)/d(logits) = softmax - onehot
  Matrix dlogits = logp.array().exp().matrix();
  for (std::size_t t = 0; t < gold.size(); ++t) {
    dlogits(static_cast<Eigen::Index>(t), gold[t]) -= 1.0;
  }
  dlogits *= scale;
  const Layout& layout = net.layout();
  const double s = net.logit_scale();
  grads->tensors[layout.embed].noalias() += dlogits.transpose() * hidden * s;
  const Matrix dhidden = dlogits * params_.tensors[layout.embed] * s;
  const Matrix dmemory = net.decoder_backward(dec_cache, dhidden, *grads);
  net.encoder_backward(ex.input, enc_cache, dmemory, *grads);
  return loss;
}

double nll_loss(const ToyModel& model, std::span<const TrainingExample> batch) {
  if (batch.empty()) throw Error(ErrorCode::kEmptyBatch, "empty batch");
  double total = 0.0;
  for (const TrainingExample& ex : batch) {
    total += model.example_loss(ex, nullptr, 0.0);
  }
  return total / static_cast<double>(batch.size());
}

double loss_and_gradients(const ToyModel& model,
                          std::span<const TrainingExample> batch,
                          ParameterSet& grads) {
  if (batch.empty()) throw Error(ErrorCode::kEmptyBatch, "empty batch");
  if (grads.size() != model.params().size()) {
    grads = model.params().zeros_like();
  } else {
    grads.set_zero();
  }
  const double scale = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (const TrainingExample& ex : batch) {
    total += model.example_loss(ex, &grads, scale);
  }
  return total * scale;
}

void AdamOptimizer::step(ParameterSet& params, const ParameterSet& grads) {
  if (m_.size() != params.size()) {
    m_ = params.zeros_like();
    v_ = params.zeros_like();
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& m = m_.tensors[i];
    Matrix& v = v_.tensors[i];
    const Matrix& g = grads.tensors[i];
    m = beta1_ * m + (1.0 - beta1_) * g;
    v = beta2_ * v + (1.0 - beta2_) * g.cwiseProduct(g);
    params.tensors[i].array() -=
        lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + eps_);
  }
}

double train_step(ToyModel& model, AdamOptimizer& optimizer,
                  std::span<const TrainingExample> batch) {
  ParameterSet grads;
  const double loss = loss_and_gradients(model, batch, grads);
  if (!std::isfinite(loss) || !grads.all_finite()) {
    throw Error(ErrorCode::kNonFiniteLoss, "loss or gradient is not finite");
  }
  optimizer.step(model.params(), grads);
  return loss;
}

// -------------------------------------------------------------- decoding

namespace {

RowVector next_log_probs(const ToyModel& model, const Matrix& memory,
                         std::span<const TokenId> prefix) {
  const Matrix logits = model.decoder_logits(memory, prefix);
  const Matrix logp = log_softmax_rows(logits.bottomRows(1));
  return logp.row(0);
}

struct Hypothesis {
  std::vector<TokenId> tokens;  // starts with BOS
  double log_prob = 0.0;
  bool finished = false;

  std::size_t scored() const { return tokens.size() - 1; }
  double normalized() const {
    return scored() == 0 ? 0.0 : log_prob / static_cast<double>(scored());
  }
};

struct GreedyResult {
  std::vector<TokenId> tokens;
  double log_prob = 0.0;
  bool finished = false;
};

GreedyResult greedy_search(const ToyModel& model, const Matrix& memory,
                           std::size_t max_len) {
  GreedyResult out;
  std::vector<TokenId> prefix = {Vocabulary::kBos};
  for (std::size_t step = 0; step < max_len; ++step) {
    const RowVector logp = next_log_probs(model, memory, prefix);
    Eigen::Index best = 0;
    for (Eigen::Index v = 1; v < logp.size(); ++v) {
      if (logp(v) > logp(best)) best = v;
    }
    out.log_prob += logp(best);
    if (best == Vocabulary::kEos) {
      out.finished = true;
      break;
    }
    prefix.push_back(static_cast<TokenId>(best));
    out.tokens.push_back(static_cast<TokenId>(best));
  }
  return out;
}

double normalized_score(double log_prob, std::size_t n_tokens, bool finished) {
  const std::size_t scored = n_tokens + (finished ? 1 : 0);
  return scored == 0 ? 0.0 : log_prob / static_cast<double>(scored);
}

}  // namespace

std::vector<TokenId> greedy_decode(const ToyModel& model,
                                   const EncoderInput& input) {
  return greedy_decode(model, input, model.config().max_decode_len);
}

std::vector<TokenId> greedy_decode(const ToyModel& model,
                                   const EncoderInput& input,
                                   std::size_t max_len) {
  if (max_len == 0) return {};
  const Matrix memory = model.encode(input);
  return greedy_search(model, memory, max_len).tokens;
}

std::vector<TokenId> beam_decode(const ToyModel& model,
                                 const EncoderInput& input, std::size_t beam,
                                 std::size_t max_len) {
  if (beam == 0) {
    throw Error(ErrorCode::kInvalidArgument, "beam size must be at least 1");
  }
  if (max_len == 0) return {};
  const Matrix memory = model.encode(input);

  std::vector<Hypothesis> alive = {Hypothesis{{Vocabulary::kBos}, 0.0, false}};
  std::vector<Hypothesis> finished;
  for (std::size_t step = 0; step < max_len && !alive.empty(); ++step) {
    struct Candidate {
      double log_prob;
      std::size_t parent;
      TokenId token;
    };
    std::vector<Candidate> candidates;
    for (std::size_t h = 0; h < alive.size(); ++h) {
      const RowVector logp = next_log_probs(model, memory, alive[h].tokens);
      for (Eigen::Index v = 0; v < logp.size(); ++v) {
        candidates.push_back(
            {alive[h].log_prob + logp(v), h, static_cast<TokenId>(v)});
      }
    }
    const std::size_t keep = std::min(beam, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                      candidates.end(),
                      [](const Candidate& a, const Candidate& b) {
                        if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
                        if (a.parent != b.parent) return a.parent < b.parent;
                        return a.token < b.token;
                      });
    std::vector<Hypothesis> next;
    for (std::size_t i = 0; i < keep; ++i) {
      const Candidate& c = candidates[i];
      Hypothesis hyp = alive[c.parent];
      hyp.tokens.push_back(c.token);
      hyp.log_prob = c.log_prob;
      if (c.token == Vocabulary::kEos) {
        hyp.finished = true;
        finished.push_back(std::move(hyp));
      } else {
        next.push_back(std::move(hyp));
      }
    }
    alive = std::move(next);
    if (finished.size() >= beam) break;
  }

  // Best of finished hypotheses, falling back to unfinished ones.
  const std::vector<Hypothesis>& pool = finished.empty() ? alive : finished;
  const Hypothesis* best = &pool.front();
  for (const Hypothesis& h : pool) {
    if (h.normalized() > best->normalized()) best = &h;
  }
  std::vector<TokenId> tokens(best->tokens.begin() + 1, best->tokens.end());
  if (best->finished) tokens.pop_back();
  const double best_score = best->normalized();

  const GreedyResult greedy = greedy_search(model, memory, max_len);
  const double greedy_score =
      normalized_score(greedy.log_prob, greedy.tokens.size(), greedy.finished);
  if (greedy_score > best_score) return greedy.tokens;
  return tokens;
}

double sequence_score(const ToyModel& model, const EncoderInput& input,
                      std::span<const TokenId> tokens, bool finished) {
  const Matrix memory = model.encode(input);
  std::vector<TokenId> prefix = {Vocabulary::kBos};
  prefix.insert(prefix.end(), tokens.begin(), tokens.end());
  std::vector<TokenId> decoder_in = prefix;
  if (!finished) decoder_in.pop_back();
  if (decoder_in.empty()) return 0.0;
  const Matrix logp = log_softmax_rows(model.decoder_logits(memory, decoder_in));
  double total = 0.0;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    total += logp(static_cast<Eigen::Index>(t), tokens[t]);
  }
  if (finished) {
    total += logp(static_cast<Eigen::Index>(tokens.size()), Vocabulary::kEos);
  }
  return normalized_score(total, tokens.size(), finished);
}

}  // namespace tabinv
