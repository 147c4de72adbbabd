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

// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "bleu.hpp"
#include "corpus.hpp"
#include "error.hpp"
#include "pipeline.hpp"
#include "test_support.hpp"

using namespace tabinv;
using namespace tabinv::testing;

namespace {

// Tolerances and budgets.
constexpr std::size_t kOracleTables = 200;
constexpr std::size_t kEquivarianceTables = 100;
constexpr std::size_t kTrainExamples = 2000;
constexpr std::size_t kTestExamples = 300;
constexpr std::size_t kTrainSteps = 5000;
constexpr double kTrainLearningRate = 1e-3;
constexpr double kGradTolerance = 1e-4;
constexpr double kGradFloor = 1e-6;
constexpr std::size_t kGradCoords = 20;
constexpr double kUniformTolerance = 1e-6;
constexpr std::size_t kOverfitExamples = 64;
constexpr std::size_t kOverfitSteps = 3000;
constexpr double kOverfitTarget = 0.1;
constexpr double kSoftmaxTolerance = 1e-6;
constexpr double kCausalTolerance = 1e-6;
constexpr double kBleuTolerance = 1e-6;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

ModelConfig desk_config(bool att, bool pos, std::uint64_t seed) {
  ModelConfig c;
  c.d_model = 32;
  c.n_heads = 4;
  c.n_enc_layers = 2;
  c.n_dec_layers = 2;
  c.d_ff = 64;
  c.max_decode_len = 40;
  c.use_structure_mask = att;
  c.use_invariant_relpos = pos;
  c.seed = seed;
  return c;
}

// ------------------------------------------------------------------ 1

Outcome mask_oracle_equivalence() {
  Rng rng(101);
  std::size_t entries = 0;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < kOracleTables; ++i) {
    Table t = random_table(rng, 6);
    Vocabulary v = vocab_for({t});
    auto seq = linearize_totto(t, v);
    StructureMask got = build_mask(seq);
    StructureMask want = mask_oracle(t, seq);
    for (std::size_t a = 0; a < seq.size(); ++a) {
      for (std::size_t b = 0; b < seq.size(); ++b) {
        ++entries;
        if (got.allowed(a, b) != want.allowed(a, b)) ++wrong;
      }
    }
  }
  return {wrong == 0, std::to_string(kOracleTables) + " tables, " +
                          std::to_string(entries) + " entries, " +
                          std::to_string(wrong) + " disagreements"};
}

// ------------------------------------------------------------------ 2

Outcome exact_equivariance() {
  Rng rng(202);
  std::vector<Table> tables;
  for (std::size_t i = 0; i < kEquivarianceTables; ++i) {
    tables.push_back(random_table(rng, 6));
  }
  const Vocabulary v = vocab_for(tables);
  std::size_t compared = 0;
  std::size_t broken = 0;
  // Two independent random checkpoints.
  std::vector<ToyModel> models;
  for (std::uint64_t seed : {7u, 8u}) {
    ModelConfig c = desk_config(true, true, seed);
    c.vocab_size = v.size();
    c.max_decode_len = 16;
    models.emplace_back(c);
  }
  // References are arbitrary fixed strings; only the BLEU difference matters.
  std::vector<std::string> refs;
  std::vector<std::vector<std::string>> gens(8 * models.size());
  for (std::size_t i = 0; i < tables.size(); ++i) {
    const Table& t = tables[i];
    refs.push_back(normalize_text(t.page_title() + " " + t.section_title()));
    auto augs = enumerate_augmentations(t, 5000 + i);
    for (auto f : {LinearizationFormat::kTotto, LinearizationFormat::kHitab,
                   LinearizationFormat::kAgnostic}) {
      const auto base = linearize(t, v, f);
      const auto mask = build_mask(base);
      const auto relpos = build_relpos(base, kDefaultPMax);
      for (const Table& a : augs) {
        const auto seq = linearize(a, v, f);
        ++compared;
        if (seq.token_ids != base.token_ids || seq.field_of != base.field_of ||
            !(build_mask(seq) == mask) ||
            !(build_relpos(seq, kDefaultPMax) == relpos)) {
          ++broken;
        }
      }
    }
    for (std::size_t m = 0; m < models.size(); ++m) {
      for (std::size_t k = 0; k < augs.size(); ++k) {
        auto in = make_encoder_input(linearize_totto(augs[k], v), kDefaultPMax);
        gens[8 * m + k].push_back(detokenize(greedy_decode(models[m], in), v));
      }
    }
  }
  std::size_t decode_mismatch = 0;
  double worst_delta = 0.0;
  for (std::size_t m = 0; m < models.size(); ++m) {
    const double origin = bleu4(gens[8 * m], refs);
    for (std::size_t k = 1; k < 8; ++k) {
      if (gens[8 * m + k] != gens[8 * m]) ++decode_mismatch;
      worst_delta = std::max(worst_delta,
                             std::abs(bleu4(gens[8 * m + k], refs) - origin));
    }
  }
  const bool pass = broken == 0 && decode_mismatch == 0 && worst_delta == 0.0;
  return {pass, std::to_string(compared) + " (table, augmentation, format) "
                "structures, " + std::to_string(broken) + " differ; " +
                std::to_string(decode_mismatch) + " decode mismatches; max |delta| " +
                fmt("%.17g", worst_delta)};
}

// -------------------------------------------------------------- 3 and 4

struct Trained {
  std::string name;
  EvalReport report;
  double final_loss = 0.0;
  double seconds = 0.0;
};

struct TrainedGrid {
  bool ready = false;
  std::vector<Trained> rows;  // baseline, att, att+pos
};

TrainedGrid& trained_grid() {
  static TrainedGrid grid;
  if (grid.ready) return grid;
  CorpusSpec train_spec;
  train_spec.n_tables = kTrainExamples;
  train_spec.seed = 31;
  CorpusSpec test_spec = train_spec;
  test_spec.n_tables = kTestExamples;
  test_spec.seed = 32;
  const auto train_data = generate_corpus(train_spec);
  const auto test_data = generate_corpus(test_spec);
  const Vocabulary vocab = build_vocabulary(train_data);

  TrainOptions opts;
  opts.steps = kTrainSteps;
  opts.batch_size = 8;
  opts.learning_rate = kTrainLearningRate;
  opts.seed = 41;
  for (const AblationRow& row : ablation_grid()) {
    const auto start = std::chrono::steady_clock::now();
    Generator gen(desk_config(row.use_structure_mask, row.use_invariant_relpos, 51),
                  vocab, row.format);
    const auto losses = train(gen, train_data, opts);
    Trained t;
    t.name = row.name;
    t.final_loss = losses.back();
    t.report = run_robustness_eval(gen, test_data, 61, 1);
    t.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              start)
                    .count();
    std::printf("  %-9s loss %.4f origin %.4f transform %.4f delta %.4f "
                "mismatches %zu (%.0f s)\n",
                t.name.c_str(), t.final_loss, t.report.bleu_origin,
                t.report.bleu_transform, t.report.delta, t.report.mismatches,
                t.seconds);
    std::fflush(stdout);
    grid.rows.push_back(std::move(t));
  }
  grid.ready = true;
  return grid;
}

Outcome directional_robustness() {
  const auto& g = trained_grid();
  const Trained& base = g.rows[0];
  const Trained& lattice = g.rows[2];
  const bool pass = base.report.delta < 0.0 && lattice.report.delta == 0.0 &&
                    lattice.report.mismatches == 0;
  return {pass, "baseline delta " + fmt("%.4f", base.report.delta) +
                    ", lattice delta " + fmt("%.4f", lattice.report.delta) +
                    " with " + std::to_string(lattice.report.mismatches) +
                    " per-example mismatches"};
}

Outcome ablation_direction() {
  const auto& g = trained_grid();
  const double base = g.rows[0].report.bleu_transform;
  const double att = g.rows[1].report.bleu_transform;
  const double both = g.rows[2].report.bleu_transform;
  const bool pass = att >= base && both >= base;
  return {pass, "transformed BLEU baseline " + fmt("%.4f", base) + ", att " +
                    fmt("%.4f", att) + ", att+pos " + fmt("%.4f", both) +
                    "; origin BLEU " + fmt("%.4f", g.rows[0].report.bleu_origin) +
                    " / " + fmt("%.4f", g.rows[1].report.bleu_origin) + " / " +
                    fmt("%.4f", g.rows[2].report.bleu_origin)};
}

// ------------------------------------------------------------------ 5

Outcome gradient_correctness() {
  double worst = 0.0;
  std::string where;
  std::size_t checked = 0;
  for (bool flags : {true, false}) {
    Rng rng(flags ? 501 : 502);
    std::vector<Table> tables;
    Vocabulary v;
    auto batch = random_examples(rng, 3, tables, v, 16);
    ModelConfig c;
    c.d_model = 8;
    c.n_heads = 2;
    c.n_enc_layers = 2;
    c.n_dec_layers = 2;
    c.d_ff = 16;
    c.p_max = 16;
    c.vocab_size = v.size();
    c.use_structure_mask = flags;
    c.use_invariant_relpos = flags;
    c.seed = 503;
    ToyModel m(c);
    auto res = gradient_check(m, batch, kGradCoords, rng, 1e-5, kGradFloor);
    checked += res.checked;
    if (res.max_rel_error > worst) {
      worst = res.max_rel_error;
      where = res.worst;
    }
  }
  return {worst < kGradTolerance,
          std::to_string(checked) + " coordinates, max relative error " +
              fmt("%.3e", worst) + " at " + where};
}

// ------------------------------------------------------------------ 6

Outcome loss_analytics() {
  CorpusSpec spec;
  spec.n_tables = kOverfitExamples;
  spec.seed = 601;
  const auto data = generate_corpus(spec);
  const Vocabulary vocab = build_vocabulary(data);

  // Zero final-norm gain makes every logit zero.
  Generator uniform(desk_config(true, true, 602), vocab, LinearizationFormat::kTotto);
  ParameterSet& p = uniform.model().params();
  p.tensors[p.index_of("dec.final_ln")].setZero();
  TrainingExample ex = uniform.training_example(data[0]);
  ex.target_ids = {Vocabulary::kBos, Vocabulary::kEos};
  std::vector<TrainingExample> one{ex};
  const double lnv = std::log(static_cast<double>(vocab.size()));
  const double uniform_err = std::abs(nll_loss(uniform.model(), one) - lnv);

  Generator gen(desk_config(true, true, 603), vocab, LinearizationFormat::kTotto);
  std::vector<TrainingExample> all;
  for (const Example& e : data) all.push_back(gen.training_example(e));
  AdamOptimizer opt(3e-3);
  Rng rng(604);
  std::vector<std::size_t> order;
  std::size_t cursor = 0;
  double loss = nll_loss(gen.model(), all);
  std::size_t reached = 0;
  for (std::size_t step = 1; step <= kOverfitSteps; ++step) {
    std::vector<TrainingExample> batch;
    while (batch.size() < 8) {
      if (cursor == order.size()) {
        order = rng.permutation(all.size());
        cursor = 0;
      }
      batch.push_back(all[order[cursor++]]);
    }
    train_step(gen.model(), opt, batch);
    if (step % 100 == 0) {
      loss = nll_loss(gen.model(), all);
      if (loss < kOverfitTarget) {
        reached = step;
        break;
      }
    }
  }
  const bool pass = uniform_err < kUniformTolerance && reached > 0;
  return {pass, "|loss - ln V| = " + fmt("%.3e", uniform_err) + " (V = " +
                    std::to_string(vocab.size()) + "); 64-example loss " +
                    fmt("%.4f", loss) +
                    (reached ? " reached at step " + std::to_string(reached)
                             : std::string(" not reached in budget"))};
}

// ------------------------------------------------------------------ 7

Outcome softmax_causality() {
  Rng rng(701);
  std::vector<Table> tables;
  Vocabulary v;
  auto batch = random_examples(rng, 20, tables, v, kDefaultPMax, 6);
  ModelConfig c = desk_config(true, true, 702);
  c.vocab_size = v.size();
  ToyModel m(c);
  double worst_norm = 0.0;
  double masked_mass = 0.0;
  double worst_causal = 0.0;
  for (const auto& ex : batch) {
    for (std::size_t l = 0; l < c.n_enc_layers; ++l) {
      for (const Matrix& p : m.encoder_attention(ex.input, l)) {
        for (Eigen::Index i = 0; i < p.rows(); ++i) {
          worst_norm = std::max(worst_norm, std::abs(p.row(i).sum() - 1.0));
          for (Eigen::Index j = 0; j < p.cols(); ++j) {
            if (!ex.input.mask.allowed(static_cast<std::size_t>(i),
                                       static_cast<std::size_t>(j))) {
              masked_mass = std::max(masked_mass, p(i, j));
            }
          }
        }
      }
    }
    const Matrix memory = m.encode(ex.input);
    std::vector<TokenId> tokens{Vocabulary::kBos};
    for (int k = 0; k < 10; ++k) {
      tokens.push_back(static_cast<TokenId>(
          v.reserved_count() + rng.uniform_index(v.size() - v.reserved_count())));
    }
    for (std::size_t l = 0; l < c.n_dec_layers; ++l) {
      for (const Matrix& p : m.decoder_self_attention(memory, tokens, l)) {
        for (Eigen::Index i = 0; i < p.rows(); ++i) {
          worst_norm = std::max(worst_norm, std::abs(p.row(i).sum() - 1.0));
        }
      }
    }
    const Matrix base = m.decoder_logits(memory, tokens);
    for (std::size_t t = 0; t + 1 < tokens.size(); ++t) {
      std::vector<TokenId> changed = tokens;
      for (std::size_t k = t + 1; k < changed.size(); ++k) {
        changed[k] = static_cast<TokenId>(
            v.reserved_count() + rng.uniform_index(v.size() - v.reserved_count()));
      }
      const Matrix out = m.decoder_logits(memory, changed);
      const auto rows = static_cast<Eigen::Index>(t + 1);
      worst_causal = std::max(
          worst_causal, (out.topRows(rows) - base.topRows(rows)).cwiseAbs().maxCoeff());
    }
  }
  const bool pass = worst_norm <= kSoftmaxTolerance && masked_mass == 0.0 &&
                    worst_causal < kCausalTolerance;
  return {pass, "max |row sum - 1| " + fmt("%.3e", worst_norm) +
                    ", max masked probability " + fmt("%.3e", masked_mass) +
                    ", max future-perturbation diff " + fmt("%.3e", worst_causal)};
}

// ------------------------------------------------------------------ 8

Outcome bleu_suite() {
  std::vector<std::string> exact{"he played wai siu - bo in royal tramp ."};
  const double s_exact = bleu4(exact, exact);
  std::vector<std::string> cand{"the the the the"};
  std::vector<std::string> ref{"the cat sat"};
  // Clipped unigram precision 1/4, zero higher-order hits smoothed to 0.1/3,
  // 0.1/2 and 0.1/1, no brevity penalty.
  const double fixture = std::pow(0.25 * (0.1 / 3) * (0.1 / 2) * 0.1, 0.25) * 100.0;
  const double s_fixture = bleu4(cand, ref);
  bool rejected = false;
  try {
    std::vector<std::string> two{"a", "b"};
    bleu4(cand, two);
  } catch (const Error& e) {
    rejected = e.code() == ErrorCode::kLengthMismatch;
  }
  const bool pass = std::abs(s_exact - 100.0) < kBleuTolerance &&
                    std::abs(s_fixture - fixture) < kBleuTolerance &&
                    std::abs(s_fixture - 8.034284189446518) < kBleuTolerance &&
                    rejected;
  return {pass, "exact " + fmt("%.6f", s_exact) + ", fixture " +
                    fmt("%.9f", s_fixture) + " (expected " + fmt("%.9f", fixture) +
                    "), length mismatch " + (rejected ? "rejected" : "accepted")};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "mask oracle equivalence", mask_oracle_equivalence},
      {2, "exact equivariance", exact_equivariance},
      {3, "directional robustness", directional_robustness},
      {4, "ablation direction", ablation_direction},
      {5, "gradient correctness", gradient_correctness},
      {6, "loss analytics", loss_analytics},
      {7, "softmax and causality invariants", softmax_causality},
      {8, "BLEU-4 unit suite", bleu_suite},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s [%d] %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id,
                c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
