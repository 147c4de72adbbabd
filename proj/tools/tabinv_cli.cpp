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

// Command-line front end over the tabinv C API.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tabinv/tabinv.h"

namespace {

constexpr int kExitError = 1;
constexpr int kExitInvariant = 2;

struct Failure {
  int code;
};

void check(tabinv_status s, const std::string& what) {
  if (s == TABINV_OK) return;
  std::cerr << "error: " << what << ": " << tabinv_status_string(s) << ": "
            << tabinv_last_error() << "\n";
  throw Failure{s == TABINV_E_INVARIANT ? kExitInvariant : kExitError};
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using TablePtr = std::unique_ptr<tabinv_table, Deleter<tabinv_table, tabinv_table_free>>;
using VocabPtr = std::unique_ptr<tabinv_vocab, Deleter<tabinv_vocab, tabinv_vocab_free>>;
using SeqPtr = std::unique_ptr<tabinv_sequence, Deleter<tabinv_sequence, tabinv_sequence_free>>;
using ModelPtr = std::unique_ptr<tabinv_model, Deleter<tabinv_model, tabinv_model_free>>;

std::string take(char* s) {
  std::string out(s == nullptr ? "" : s);
  tabinv_string_free(s);
  return out;
}

tabinv_format parse_format(const std::string& name) {
  tabinv_format f;
  check(tabinv_format_parse(name.c_str(), &f), "format");
  return f;
}

// Tables of a JSONL file, in order. Accepts dataset lines
// ({"table": ..., "target": ...}) or bare table lines.
std::vector<TablePtr> read_tables(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "error: cannot open " << path << "\n";
    throw Failure{kExitError};
  }
  std::vector<TablePtr> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::string table_json = line;
    try {
      auto j = nlohmann::json::parse(line);
      if (j.is_object() && j.contains("table")) table_json = j["table"].dump();
    } catch (const nlohmann::json::exception&) {
      // Leave the line as is; the library reports the parse error.
    }
    tabinv_table* t = nullptr;
    tabinv_status s = tabinv_table_from_json(table_json.c_str(), &t);
    check(s, path + ":" + std::to_string(lineno));
    out.emplace_back(t);
  }
  return out;
}

std::string on_off(bool v) { return v ? "on" : "off"; }

void print_config(const tabinv_model_config& c, tabinv_format f) {
  std::cout << "config: d_model=" << c.d_model << " heads=" << c.n_heads
            << " layers=" << c.n_enc_layers << "+" << c.n_dec_layers
            << " d_ff=" << c.d_ff << " p_max=" << c.p_max
            << " att=" << on_off(c.use_structure_mask)
            << " pos=" << on_off(c.use_invariant_relpos) << " format="
            << (f == TABINV_FORMAT_TOTTO      ? "totto"
                : f == TABINV_FORMAT_HITAB    ? "hitab"
                : f == TABINV_FORMAT_AGNOSTIC ? "agnostic"
                                              : "indexed")
            << "\n";
}

void progress(size_t step, double loss, void*) {
  std::printf("step %zu loss %.6f\n", step, loss);
  std::fflush(stdout);
}

struct ModelFlags {
  std::size_t d_model = 32;
  std::size_t heads = 4;
  std::size_t layers = 2;
  std::size_t d_ff = 0;
  int p_max = 128;
  std::string att = "on";
  std::string pos = "on";

  void add(CLI::App* app) {
    app->add_option("--d-model", d_model, "Model width")->capture_default_str();
    app->add_option("--heads", heads, "Attention heads")->capture_default_str();
    app->add_option("--layers", layers, "Encoder and decoder layers")
        ->capture_default_str();
    app->add_option("--d-ff", d_ff, "Feed-forward width (0 = 2 x d-model)");
    app->add_option("--p-max", p_max, "Relative position clip")
        ->capture_default_str();
    app->add_option("--att", att, "Structure-aware attention mask")
        ->check(CLI::IsMember({"on", "off"}))
        ->capture_default_str();
    app->add_option("--pos", pos, "Field-aware relative positions")
        ->check(CLI::IsMember({"on", "off"}))
        ->capture_default_str();
  }

  tabinv_model_config config(std::uint64_t seed) const {
    tabinv_model_config c;
    tabinv_model_config_default(&c);
    c.d_model = d_model;
    c.n_heads = heads;
    c.n_enc_layers = layers;
    c.n_dec_layers = layers;
    c.d_ff = d_ff == 0 ? 2 * d_model : d_ff;
    c.p_max = p_max;
    c.use_structure_mask = att == "on";
    c.use_invariant_relpos = pos == "on";
    c.seed = seed;
    return c;
  }
};

struct TrainFlags {
  std::size_t steps = 1000;
  std::size_t batch = 8;
  double lr = 2e-4;
  std::size_t log_every = 100;

  void add(CLI::App* app) {
    app->add_option("--steps", steps, "Optimizer steps")->capture_default_str();
    app->add_option("--batch", batch, "Batch size")->capture_default_str();
    app->add_option("--lr", lr, "Adam learning rate")->capture_default_str();
    app->add_option("--log-every", log_every, "Loss report interval")
        ->capture_default_str();
  }

  tabinv_train_options options(std::uint64_t seed) const {
    tabinv_train_options o;
    tabinv_train_options_default(&o);
    o.steps = steps;
    o.batch_size = batch;
    o.learning_rate = lr;
    o.seed = seed;
    o.log_every = log_every;
    o.progress = log_every == 0 ? nullptr : progress;
    return o;
  }
};

// Beam and length defaults follow the linearization: HiTab-style inputs
// decode shorter with a wider beam.
void decode_defaults(tabinv_format f, std::size_t& beam, std::size_t& max_len) {
  bool hitab = f == TABINV_FORMAT_HITAB;
  if (beam == 0) beam = hitab ? 5 : 4;
  if (max_len == 0) max_len = hitab ? 60 : 128;
}

void print_report(const char* label, const tabinv_eval_report& r) {
  std::printf("%s: n=%zu origin=%.4f transform=%.4f delta=%.4f", label,
              r.n_examples, r.bleu_origin, r.bleu_transform, r.delta);
  if (r.equality_asserted) std::printf(" mismatches=%zu", r.mismatches);
  std::printf("\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structure-aware, layout-invariant table-to-text toolkit"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::string in_path;
  std::string out_path;
  auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "Random seed")->capture_default_str();
  };

  // gen-corpus
  tabinv_corpus_spec spec;
  tabinv_corpus_spec_default(&spec);
  auto* gen = app.add_subcommand("gen-corpus", "Write a synthetic dataset");
  gen->add_option("--n", spec.n_tables, "Number of tables")
      ->capture_default_str();
  gen->add_option("--family", spec.family,
                  "Template family (0 filmography, 1 career statistics)")
      ->check(CLI::Range(0, 1))
      ->capture_default_str();
  gen->add_option("--min-rows", spec.min_rows)->capture_default_str();
  gen->add_option("--max-rows", spec.max_rows)->capture_default_str();
  gen->add_option("--min-cols", spec.min_cols)->capture_default_str();
  gen->add_option("--max-cols", spec.max_cols)->capture_default_str();
  gen->add_option("--min-highlight", spec.min_highlight)->capture_default_str();
  gen->add_option("--max-highlight", spec.max_highlight)->capture_default_str();
  gen->add_option("-o,--out", out_path, "Output JSONL")->required();
  add_seed(gen);

  auto* aug = app.add_subcommand("augment", "Eight-fold layout augmentation");
  aug->add_option("-i,--in", in_path, "Input JSONL")->required();
  aug->add_option("-o,--out", out_path, "Output JSONL")->required();
  add_seed(aug);

  auto* pert = app.add_subcommand(
      "perturb", "Transpose and shuffle every table once");
  pert->add_option("-i,--in", in_path, "Input JSONL")->required();
  pert->add_option("-o,--out", out_path, "Output JSONL")->required();
  add_seed(pert);

  auto* imp = app.add_subcommand("import-totto",
                                 "Convert ToTTo-format JSONL to dataset JSONL");
  imp->add_option("-i,--in", in_path, "ToTTo JSONL")->required();
  imp->add_option("-o,--out", out_path, "Output JSONL")->required();
  add_seed(imp);

  std::string format_name = "totto";
  std::string vocab_path;
  std::size_t max_input_len = 512;
  auto* lin = app.add_subcommand("linearize", "Linearize tables to tokens");
  lin->add_option("format", format_name, "totto, hitab, agnostic or indexed")
      ->check(CLI::IsMember({"totto", "hitab", "agnostic", "indexed"}))
      ->required();
  lin->add_option("-i,--in", in_path, "Input JSONL")->required();
  lin->add_option("-o,--out", out_path, "Output JSONL (default stdout)");
  lin->add_option("--vocab", vocab_path, "Vocabulary file (default: built from input)");
  lin->add_option("--max-len", max_input_len, "Input token budget")
      ->capture_default_str();
  add_seed(lin);

  int p_max = 128;
  auto* exp = app.add_subcommand("export-structure",
                                 "Export attention mask and relative positions");
  exp->add_option("-i,--in", in_path, "Input JSONL")->required();
  exp->add_option("-o,--out", out_path, "Output JSONL (default stdout)");
  exp->add_option("--format", format_name, "Linearization")
      ->check(CLI::IsMember({"totto", "hitab", "agnostic", "indexed"}))
      ->capture_default_str();
  exp->add_option("--vocab", vocab_path, "Vocabulary file (default: built from input)");
  exp->add_option("--p-max", p_max, "Relative position clip")
      ->capture_default_str();
  exp->add_option("--max-len", max_input_len, "Input token budget")
      ->capture_default_str();
  add_seed(exp);

  ModelFlags mflags;
  TrainFlags tflags;
  std::string model_path;
  std::vector<std::string> vocab_extra;
  auto* tr = app.add_subcommand("train", "Train a model from scratch");
  tr->add_option("-i,--in", in_path, "Training JSONL")->required();
  tr->add_option("-o,--out", out_path, "Checkpoint path")->required();
  tr->add_option("--format", format_name, "Input linearization")
      ->check(CLI::IsMember({"totto", "hitab", "agnostic", "indexed"}))
      ->capture_default_str();
  tr->add_option("--vocab-from", vocab_extra,
                 "Extra datasets whose words join the vocabulary");
  tr->add_option("--max-len", max_input_len, "Input token budget")
      ->capture_default_str();
  mflags.add(tr);
  tflags.add(tr);
  add_seed(tr);

  std::size_t beam = 0;
  std::size_t max_len = 0;
  auto* dec = app.add_subcommand("decode", "Generate sentences for a dataset");
  dec->add_option("-m,--model", model_path, "Checkpoint")->required();
  dec->add_option("-i,--in", in_path, "Input JSONL")->required();
  dec->add_option("-o,--out", out_path, "Generations JSONL")->required();
  dec->add_option("--beam", beam, "Beam size (default 4, or 5 for hitab)");
  dec->add_option("--max-len", max_len,
                  "Maximum output tokens (default 128, or 60 for hitab)");
  add_seed(dec);

  auto* ev = app.add_subcommand(
      "eval-robustness", "BLEU on original and perturbed tables");
  ev->add_option("-m,--model", model_path, "Checkpoint")->required();
  ev->add_option("-i,--in", in_path, "Dev JSONL")->required();
  ev->add_option("-o,--out", out_path, "Paired generations JSONL");
  ev->add_option("--beam", beam, "Beam size (default 4, or 5 for hitab)");
  add_seed(ev);

  std::string test_path;
  auto* abl = app.add_subcommand("ablate",
                                 "Train and evaluate the ablation grid");
  abl->add_option("--train", in_path, "Training JSONL")->required();
  abl->add_option("--test", test_path, "Test JSONL")->required();
  abl->add_option("--beam", beam, "Beam size")->capture_default_str();
  mflags.add(abl);
  tflags.add(abl);
  add_seed(abl);

  CLI11_PARSE(app, argc, argv);

  try {
    std::cout << "seed: " << seed << "\n";

    if (gen->parsed()) {
      spec.seed = seed;
      check(tabinv_generate_corpus(&spec, out_path.c_str()), "gen-corpus");
      std::cout << "wrote " << spec.n_tables << " examples to " << out_path
                << "\n";
    } else if (aug->parsed()) {
      check(tabinv_augment_file(in_path.c_str(), out_path.c_str(), seed),
            "augment");
      std::size_t n = 0;
      check(tabinv_dataset_count(out_path.c_str(), &n), "augment");
      std::cout << "wrote " << n << " examples to " << out_path << "\n";
    } else if (pert->parsed()) {
      check(tabinv_perturb_file(in_path.c_str(), out_path.c_str(), seed),
            "perturb");
      std::cout << "wrote " << out_path << "\n";
    } else if (imp->parsed()) {
      check(tabinv_import_totto_file(in_path.c_str(), out_path.c_str()),
            "import-totto");
      std::cout << "wrote " << out_path << "\n";
    } else if (lin->parsed() || exp->parsed()) {
      tabinv_format f = parse_format(format_name);
      tabinv_vocab* v = nullptr;
      if (vocab_path.empty()) {
        check(tabinv_vocab_from_dataset(in_path.c_str(), &v), "vocabulary");
      } else {
        check(tabinv_vocab_load(vocab_path.c_str(), &v), "vocabulary");
      }
      VocabPtr vocab(v);
      std::ofstream file;
      if (!out_path.empty()) {
        file.open(out_path);
        if (!file) {
          std::cerr << "error: cannot write " << out_path << "\n";
          return kExitError;
        }
      }
      std::ostream& out = out_path.empty() ? std::cout : file;
      for (const auto& table : read_tables(in_path)) {
        tabinv_sequence* s = nullptr;
        check(tabinv_linearize(table.get(), vocab.get(), f, max_input_len, &s),
              "linearize");
        SeqPtr seq(s);
        char* json = nullptr;
        if (lin->parsed()) {
          check(tabinv_sequence_to_json(seq.get(), &json), "linearize");
        } else {
          check(tabinv_structure_to_json(seq.get(), p_max, &json),
                "export-structure");
        }
        out << take(json) << "\n";
      }
    } else if (tr->parsed()) {
      tabinv_format f = parse_format(format_name);
      std::vector<const char*> sources{in_path.c_str()};
      for (const auto& p : vocab_extra) sources.push_back(p.c_str());
      tabinv_vocab* v = nullptr;
      check(tabinv_vocab_from_datasets(sources.data(), sources.size(), &v),
            "vocabulary");
      VocabPtr vocab(v);
      tabinv_model_config cfg = mflags.config(seed);
      tabinv_model* m = nullptr;
      check(tabinv_model_create(&cfg, vocab.get(), f, max_input_len, &m),
            "train");
      ModelPtr model(m);
      print_config(cfg, f);
      std::cout << "vocab: " << tabinv_vocab_size(vocab.get())
                << " parameters: " << tabinv_model_parameter_count(m) << "\n";
      tabinv_train_options opts = tflags.options(seed);
      double loss = 0.0;
      check(tabinv_model_train(m, in_path.c_str(), &opts, &loss), "train");
      check(tabinv_model_save(m, out_path.c_str()), "save");
      std::printf("final loss %.6f\nwrote %s\n", loss, out_path.c_str());
    } else if (dec->parsed()) {
      tabinv_model* m = nullptr;
      check(tabinv_model_load(model_path.c_str(), &m), "load");
      ModelPtr model(m);
      decode_defaults(tabinv_model_format(m), beam, max_len);
      double bleu = 0.0;
      check(tabinv_model_decode_file(m, in_path.c_str(), out_path.c_str(),
                                     beam, max_len, &bleu),
            "decode");
      std::printf("beam %zu max_len %zu bleu %.4f\nwrote %s\n", beam, max_len,
                  bleu, out_path.c_str());
    } else if (ev->parsed()) {
      tabinv_model* m = nullptr;
      check(tabinv_model_load(model_path.c_str(), &m), "load");
      ModelPtr model(m);
      std::size_t unused = 0;
      decode_defaults(tabinv_model_format(m), beam, unused);
      tabinv_eval_report r;
      check(tabinv_eval_robustness(m, in_path.c_str(), seed, beam,
                                   out_path.empty() ? nullptr
                                                    : out_path.c_str(),
                                   &r),
            "eval-robustness");
      print_report("robustness", r);
      if (r.equality_asserted && (r.mismatches != 0 || r.delta != 0.0)) {
        std::cerr << "error: layout-invariant model produced different "
                     "generations on perturbed tables\n";
        return kExitInvariant;
      }
    } else if (abl->parsed()) {
      if (beam == 0) beam = 1;
      tabinv_model_config cfg = mflags.config(seed);
      tabinv_train_options opts = tflags.options(seed);
      tabinv_ablation_row rows[3];
      check(tabinv_run_ablation(in_path.c_str(), test_path.c_str(), &cfg,
                                &opts, seed, beam, rows),
            "ablate");
      bool ok = true;
      std::printf("%-10s %-8s %-4s %-4s %10s %10s %10s %10s\n", "config",
                  "format", "att", "pos", "loss", "origin", "transform",
                  "delta");
      for (const auto& row : rows) {
        std::printf("%-10s %-8s %-4s %-4s %10.4f %10.4f %10.4f %10.4f\n",
                    row.name,
                    row.format == TABINV_FORMAT_INDEXED ? "indexed" : "totto",
                    on_off(row.use_structure_mask).c_str(),
                    on_off(row.use_invariant_relpos).c_str(), row.final_loss,
                    row.report.bleu_origin, row.report.bleu_transform,
                    row.report.delta);
        if (row.report.equality_asserted &&
            (row.report.mismatches != 0 || row.report.delta != 0.0)) {
          ok = false;
        }
      }
      if (!ok) {
        std::cerr << "error: layout-invariant configuration changed its "
                     "output under perturbation\n";
        return kExitInvariant;
      }
    }
  } catch (const Failure& f) {
    return f.code;
  }
  return 0;
}
