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

#include <cmath>
#include <vector>

#include "doctest.h"
#include "error.hpp"
#include "model.hpp"
#include "test_support.hpp"

using namespace tabinv;
using namespace tabinv::testing;

namespace {

ModelConfig tiny(std::size_t vocab, std::uint64_t seed = 1, bool att = true,
                 bool pos = true) {
  ModelConfig c;
  c.d_model = 8;
  c.n_heads = 2;
  c.n_enc_layers = 2;
  c.n_dec_layers = 2;
  c.d_ff = 16;
  c.p_max = 8;
  c.vocab_size = vocab;
  c.seed = seed;
  c.max_decode_len = 12;
  c.use_structure_mask = att;
  c.use_invariant_relpos = pos;
  return c;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("config validation") {
  ModelConfig c = tiny(20);
  c.n_heads = 3;
  CHECK_THROWS_AS(ToyModel{c}, Error);
  c = tiny(20);
  c.p_max = 0;
  try {
    ToyModel m(c);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidPMax);
  }
  c = tiny(0);
  CHECK_THROWS_AS(ToyModel{c}, Error);
}

TEST_CASE("parameter layout") {
  ToyModel m(tiny(20));
  const auto& p = m.params();
  CHECK(p.names.front() == "embed");
  CHECK(p.tensors[p.index_of("embed")].rows() == 20);
  CHECK(p.tensors[p.index_of("enc.rel_bias")].rows() == 2);
  CHECK(p.tensors[p.index_of("enc.rel_bias")].cols() == 9);
  CHECK(p.tensors[p.index_of("dec.1.cross.q")].rows() == 8);
  CHECK(p.names.back() == "dec.final_ln");
  CHECK_THROWS_AS(p.index_of("nope"), Error);
  // Reconstruction checks shapes.
  ParameterSet copy = p;
  CHECK(ToyModel(tiny(20), copy).params().count() == p.count());
  copy.tensors[0] = Matrix::Zero(3, 3);
  CHECK_THROWS_AS(ToyModel(tiny(20), copy), Error);
  // Same seed, same parameters.
  ToyModel again(tiny(20));
  for (std::size_t i = 0; i < p.size(); ++i) {
    CHECK(p.tensors[i] == again.params().tensors[i]);
  }
}

TEST_CASE("uniform logits give ln V") {
  Rng rng(41);
  std::vector<Table> tables;
  Vocabulary v;
  auto batch = random_examples(rng, 3, tables, v, 8);
  ToyModel m(tiny(v.size()));
  m.params().tensors[m.params().index_of("dec.final_ln")].setZero();
  TrainingExample one = batch[0];
  one.target_ids = {Vocabulary::kBos, Vocabulary::kEos};
  std::vector<TrainingExample> b{one};
  CHECK(nll_loss(m, b) == doctest::Approx(std::log(static_cast<double>(v.size()))).epsilon(1e-12));
  // Three target steps cost three times as much.
  one.target_ids = {Vocabulary::kBos, 20, 21, Vocabulary::kEos};
  b = {one};
  CHECK(std::abs(nll_loss(m, b) - 3.0 * std::log(static_cast<double>(v.size()))) < 1e-9);
}

TEST_CASE("loss is a mean over examples") {
  Rng rng(42);
  std::vector<Table> tables;
  Vocabulary v;
  auto batch = random_examples(rng, 2, tables, v, 8);
  ToyModel m(tiny(v.size()));
  std::vector<TrainingExample> one{batch[0]};
  std::vector<TrainingExample> two{batch[0], batch[0]};
  CHECK(std::abs(nll_loss(m, one) - nll_loss(m, two)) < 1e-12);
  CHECK(nll_loss(m, one) > 0.0);
  std::vector<TrainingExample> none;
  try {
    nll_loss(m, none);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptyBatch);
  }
}

TEST_CASE("gradients match finite differences") {
  for (bool flags : {true, false}) {
    Rng rng(43);
    std::vector<Table> tables;
    Vocabulary v;
    auto batch = random_examples(rng, 2, tables, v, 8);
    ToyModel m(tiny(v.size(), 7, flags, flags));
    auto res = gradient_check(m, batch, 8, rng);
    INFO("worst " << res.worst);
    CHECK(res.max_rel_error < 1e-4);
  }
}

TEST_CASE("zero learning rate leaves parameters unchanged") {
  Rng rng(44);
  std::vector<Table> tables;
  Vocabulary v;
  auto batch = random_examples(rng, 2, tables, v, 8);
  ToyModel m(tiny(v.size()));
  const ParameterSet before = m.params();
  AdamOptimizer opt(0.0);
  train_step(m, opt, batch);
  for (std::size_t i = 0; i < before.size(); ++i) {
    CHECK(before.tensors[i] == m.params().tensors[i]);
  }
}

TEST_CASE("non-finite parameters abort the step") {
  Rng rng(45);
  std::vector<Table> tables;
  Vocabulary v;
  auto batch = random_examples(rng, 1, tables, v, 8);
  ToyModel m(tiny(v.size()));
  m.params().tensors[m.params().index_of("dec.0.ff.b1")](0, 0) = std::nan("");
  const ParameterSet before = m.params();
  AdamOptimizer opt(1e-2);
  try {
    train_step(m, opt, batch);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNonFiniteLoss);
  }
  CHECK(opt.steps() == 0);
  CHECK(m.params().tensors[1] == before.tensors[1]);
}

TEST_CASE("training is deterministic and reduces the loss") {
  Rng rng(46);
  std::vector<Table> tables;
  Vocabulary v;
  auto data = random_examples(rng, 16, tables, v, 8);
  auto run = [&](std::size_t steps, std::vector<double>& losses) {
    ToyModel m(tiny(v.size(), 3));
    AdamOptimizer opt(1e-2);
    for (std::size_t s = 0; s < steps; ++s) {
      std::vector<TrainingExample> b{data[(2 * s) % 16], data[(2 * s + 1) % 16]};
      losses.push_back(train_step(m, opt, b));
    }
    return m;
  };
  std::vector<double> la;
  std::vector<double> lb;
  ToyModel a = run(200, la);
  ToyModel b = run(200, lb);
  for (std::size_t i = 0; i < a.params().size(); ++i) {
    CHECK(a.params().tensors[i] == b.params().tensors[i]);
  }
  CHECK(la == lb);
  // Trend: the last 20 steps average well below the first 20.
  double head = 0.0;
  double tail = 0.0;
  for (std::size_t i = 0; i < 20; ++i) {
    head += la[i];
    tail += la[la.size() - 1 - i];
  }
  CHECK(tail < 0.5 * head);
  CHECK(nll_loss(a, data) < nll_loss(ToyModel(tiny(v.size(), 3)), data));
}

TEST_CASE("single-token input") {
  Vocabulary v = Vocabulary::build(std::vector<std::string>{"x"});
  LinearizedSequence s;
  s.fields = {Field{}};
  s.token_ids = {v.id("x")};
  s.token_texts = {"x"};
  s.field_of = {0};
  ToyModel m(tiny(v.size()));
  EncoderInput in = make_encoder_input(s, 8);
  for (std::size_t l = 0; l < 2; ++l) {
    for (const Matrix& p : m.encoder_attention(in, l)) {
      CHECK(p.rows() == 1);
      CHECK(p(0, 0) == 1.0);
    }
  }
  CHECK(m.encode(in).rows() == 1);
}

TEST_CASE("dimension checks") {
  Rng rng(47);
  std::vector<Table> tables;
  Vocabulary v;
  auto batch = random_examples(rng, 1, tables, v, 8);
  ToyModel m(tiny(v.size()));
  EncoderInput in = batch[0].input;
  in.tokens.push_back(in.tokens.front());
  try {
    m.encode(in);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDimensionMismatch);
  }
  EncoderInput other_pmax = batch[0].input;
  other_pmax.relpos = RelPosMatrix(other_pmax.tokens.size(), 4);
  CHECK_THROWS_AS(m.encode(other_pmax), Error);
  CHECK_THROWS_AS(m.encoder_attention(batch[0].input, 2), Error);
}

TEST_CASE("masked softmax rows are normalized and respect the mask") {
  Rng rng(48);
  std::vector<Table> tables;
  Vocabulary v;
  auto batch = random_examples(rng, 10, tables, v, 8, 5);
  ToyModel m(tiny(v.size()));
  for (const auto& ex : batch) {
    for (std::size_t l = 0; l < 2; ++l) {
      for (const Matrix& p : m.encoder_attention(ex.input, l)) {
        for (Eigen::Index i = 0; i < p.rows(); ++i) {
          CHECK(std::abs(p.row(i).sum() - 1.0) < 1e-12);
          for (Eigen::Index j = 0; j < p.cols(); ++j) {
            if (!ex.input.mask.allowed(static_cast<std::size_t>(i),
                                       static_cast<std::size_t>(j))) {
              CHECK(p(i, j) == 0.0);
            }
          }
        }
      }
    }
  }
}

TEST_CASE("masked pairs do not exchange information in one layer") {
  Rng rng(49);
  std::vector<Table> tables;
  Vocabulary v;
  auto batch = random_examples(rng, 10, tables, v, 8, 5);
  ModelConfig c = tiny(v.size());
  c.n_enc_layers = 1;
  ToyModel m(c);
  int tested = 0;
  for (const auto& ex : batch) {
    const EncoderInput& in = ex.input;
    const Matrix base = m.encode(in);
    for (std::size_t i = 0; i < in.tokens.size(); ++i) {
      for (std::size_t j = 0; j < in.tokens.size(); ++j) {
        if (in.mask.allowed(i, j)) continue;
        EncoderInput changed = in;
        changed.tokens[j] = changed.tokens[j] == 20 ? 21 : 20;
        CHECK(m.encode(changed).row(static_cast<Eigen::Index>(i)) ==
              base.row(static_cast<Eigen::Index>(i)));
        ++tested;
      }
    }
  }
  CHECK(tested > 0);
}

TEST_CASE("decoder is causal") {
  Rng rng(50);
  std::vector<Table> tables;
  Vocabulary v;
  auto batch = random_examples(rng, 5, tables, v, 8);
  ToyModel m(tiny(v.size()));
  for (const auto& ex : batch) {
    const Matrix memory = m.encode(ex.input);
    std::vector<TokenId> tokens{Vocabulary::kBos, 20, 21, 22, 23, 24};
    const Matrix base = m.decoder_logits(memory, tokens);
    for (std::size_t t = 0; t + 1 < tokens.size(); ++t) {
      std::vector<TokenId> changed = tokens;
      for (std::size_t k = t + 1; k < changed.size(); ++k) changed[k] = 16;
      const Matrix out = m.decoder_logits(memory, changed);
      CHECK(max_abs_diff(out.topRows(static_cast<Eigen::Index>(t + 1)),
                         base.topRows(static_cast<Eigen::Index>(t + 1))) < 1e-12);
    }
    for (const Matrix& p : m.decoder_self_attention(memory, tokens, 1)) {
      for (Eigen::Index i = 0; i < p.rows(); ++i) {
        CHECK(std::abs(p.row(i).sum() - 1.0) < 1e-12);
        for (Eigen::Index j = i + 1; j < p.cols(); ++j) CHECK(p(i, j) == 0.0);
      }
    }
  }
}

TEST_CASE("encoder is equivariant to field-respecting reorderings") {
  Rng rng(51);
  int checked = 0;
  for (int trial = 0; trial < 30; ++trial) {
    Table t = random_table(rng, 5);
    if (t.highlighted().size() < 2) continue;
    Vocabulary v = vocab_for({t});
    // Shuffles change the row-major block order but not block contents.
    Table g = shuffle_cols(
        shuffle_rows(t, rng.permutation(t.data_rows().size())),
        rng.permutation(t.data_cols().size()));
    auto a = linearize_indexed(t, v);
    auto b = linearize_indexed(g, v);
    auto pi = induced_permutation(a, b);
    REQUIRE(pi.has_value());

    ToyModel lattice(tiny(v.size(), 5, true, true));
    const Matrix ea = lattice.encode(make_encoder_input(a, 8));
    const Matrix eb = lattice.encode(make_encoder_input(b, 8));
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(max_abs_diff(ea.row(static_cast<Eigen::Index>(i)),
                         eb.row(static_cast<Eigen::Index>((*pi)[i]))) < 1e-9);
    }
    ++checked;
  }
  CHECK(checked > 5);
}

TEST_CASE("without the layout flags position leaks into the encoding") {
  Table t("p", "s", {{data("alpha"), data("beta")}}, {{0, 0}, {0, 1}});
  Vocabulary v = vocab_for({t});
  Table g = shuffle_cols(t, std::vector<std::size_t>{1, 0});
  auto a = linearize_indexed(t, v);
  auto b = linearize_indexed(g, v);
  auto pi = induced_permutation(a, b);
  REQUIRE(pi.has_value());
  ToyModel plain(tiny(v.size(), 5, false, false));
  const Matrix ea = plain.encode(make_encoder_input(a, 8));
  const Matrix eb = plain.encode(make_encoder_input(b, 8));
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, max_abs_diff(ea.row(static_cast<Eigen::Index>(i)),
                                         eb.row(static_cast<Eigen::Index>((*pi)[i]))));
  }
  CHECK(worst > 1e-3);
}

TEST_CASE("decoding") {
  Rng rng(52);
  std::vector<Table> tables;
  Vocabulary v;
  auto batch = random_examples(rng, 50, tables, v, 8);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    ToyModel m(tiny(v.size(), 100 + i));
    const EncoderInput& in = batch[i].input;
    auto greedy = greedy_decode(m, in);
    CHECK(greedy.size() <= 12);
    CHECK(beam_decode(m, in, 1, 12) == greedy);
    CHECK(greedy_decode(m, in, 0).empty());
    auto beam = beam_decode(m, in, 4, 12);
    // A hypothesis shorter than max_len ended with EOS.
    auto score = [&](const std::vector<TokenId>& y) {
      return sequence_score(m, in, y, y.size() < 12);
    };
    CHECK(score(beam) + 1e-12 >= score(greedy));
  }
  ToyModel m(tiny(v.size()));
  CHECK_THROWS_AS(beam_decode(m, batch[0].input, 0, 5), Error);
}

TEST_CASE("greedy decoding is unchanged by any augmentation") {
  Rng rng(53);
  for (int i = 0; i < 20; ++i) {
    Table t = random_table(rng, 5);
    Vocabulary v = vocab_for({t});
    ToyModel m(tiny(v.size(), 9));
    auto base = greedy_decode(m, make_encoder_input(linearize_totto(t, v), 8));
    for (const Table& a : enumerate_augmentations(t, i)) {
      CHECK(greedy_decode(m, make_encoder_input(linearize_totto(a, v), 8)) == base);
    }
  }
}

TEST_CASE("overfitting one example reproduces its target") {
  Rng rng(54);
  std::vector<Table> tables;
  Vocabulary v;
  auto batch = random_examples(rng, 1, tables, v, 8);
  ToyModel m(tiny(v.size(), 2));
  AdamOptimizer opt(2e-2);
  for (int s = 0; s < 300; ++s) train_step(m, opt, batch);
  const auto& target = batch[0].target_ids;
  std::vector<TokenId> inner(target.begin() + 1, target.end() - 1);
  CHECK(greedy_decode(m, batch[0].input) == inner);
}
