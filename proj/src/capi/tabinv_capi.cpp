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

#include "tabinv/tabinv.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <fstream>
#include <iterator>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "bleu.hpp"
#include "corpus.hpp"
#include "dataset.hpp"
#include "error.hpp"
#include "json.hpp"
#include "linearizer.hpp"
#include "pipeline.hpp"
#include "structure.hpp"
#include "table.hpp"
#include "vocab.hpp"

struct tabinv_table {
  tabinv::Table value;
};
struct tabinv_vocab {
  tabinv::Vocabulary value;
};
struct tabinv_sequence {
  tabinv::LinearizedSequence value;
};
struct tabinv_model {
  tabinv::Generator value;
};

namespace {

thread_local std::string g_last_error;

tabinv_status to_status(tabinv::ErrorCode code) {
  return static_cast<tabinv_status>(static_cast<int>(code));
}

template <typename F>
tabinv_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return TABINV_OK;
  } catch (const tabinv::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const nlohmann::json::exception& e) {
    g_last_error = e.what();
    return TABINV_E_PARSE;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return TABINV_E_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return TABINV_E_INTERNAL;
  }
}

void require(bool cond, const char* what) {
  if (!cond) throw tabinv::Error(tabinv::ErrorCode::kInvalidArgument, what);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

tabinv::LinearizationFormat to_format(tabinv_format f) {
  switch (f) {
    case TABINV_FORMAT_TOTTO:
      return tabinv::LinearizationFormat::kTotto;
    case TABINV_FORMAT_HITAB:
      return tabinv::LinearizationFormat::kHitab;
    case TABINV_FORMAT_AGNOSTIC:
      return tabinv::LinearizationFormat::kAgnostic;
    case TABINV_FORMAT_INDEXED:
      return tabinv::LinearizationFormat::kIndexed;
  }
  throw tabinv::Error(tabinv::ErrorCode::kInvalidArgument,
                      "unknown linearization format");
}

tabinv_format from_format(tabinv::LinearizationFormat f) {
  switch (f) {
    case tabinv::LinearizationFormat::kTotto:
      return TABINV_FORMAT_TOTTO;
    case tabinv::LinearizationFormat::kHitab:
      return TABINV_FORMAT_HITAB;
    case tabinv::LinearizationFormat::kAgnostic:
      return TABINV_FORMAT_AGNOSTIC;
    case tabinv::LinearizationFormat::kIndexed:
      return TABINV_FORMAT_INDEXED;
  }
  return TABINV_FORMAT_TOTTO;
}

tabinv::ModelConfig to_config(const tabinv_model_config& c) {
  tabinv::ModelConfig out;
  out.d_model = c.d_model;
  out.n_heads = c.n_heads;
  out.n_enc_layers = c.n_enc_layers;
  out.n_dec_layers = c.n_dec_layers;
  out.d_ff = c.d_ff;
  out.p_max = c.p_max;
  out.use_structure_mask = c.use_structure_mask != 0;
  out.use_invariant_relpos = c.use_invariant_relpos != 0;
  out.max_decode_len = c.max_decode_len;
  out.seed = c.seed;
  return out;
}

tabinv_model_config from_config(const tabinv::ModelConfig& c) {
  tabinv_model_config out;
  out.d_model = c.d_model;
  out.n_heads = c.n_heads;
  out.n_enc_layers = c.n_enc_layers;
  out.n_dec_layers = c.n_dec_layers;
  out.d_ff = c.d_ff;
  out.p_max = c.p_max;
  out.use_structure_mask = c.use_structure_mask ? 1 : 0;
  out.use_invariant_relpos = c.use_invariant_relpos ? 1 : 0;
  out.max_decode_len = c.max_decode_len;
  out.seed = c.seed;
  return out;
}

tabinv::TrainOptions to_options(const tabinv_train_options& o) {
  tabinv::TrainOptions out;
  out.steps = o.steps;
  out.batch_size = o.batch_size;
  out.learning_rate = o.learning_rate;
  out.seed = o.seed;
  out.log_every = o.log_every;
  if (o.progress != nullptr) {
    tabinv_progress_fn fn = o.progress;
    void* user = o.progress_user;
    out.on_log = [fn, user](std::size_t step, double loss) {
      fn(step, loss, user);
    };
  }
  return out;
}

void fill_report(const tabinv::EvalReport& r, tabinv_eval_report* out) {
  out->bleu_origin = r.bleu_origin;
  out->bleu_transform = r.bleu_transform;
  out->delta = r.delta;
  out->n_examples = r.references.size();
  out->equality_asserted = r.equality_asserted ? 1 : 0;
  out->mismatches = r.mismatches;
}

tabinv_table* wrap(tabinv::Table t) { return new tabinv_table{std::move(t)}; }

}  // namespace

extern "C" {

const char* tabinv_last_error(void) { return g_last_error.c_str(); }

const char* tabinv_status_string(tabinv_status status) {
  switch (status) {
    case TABINV_OK:
      return "ok";
    case TABINV_E_INVALID_ARGUMENT:
      return "invalid argument";
    case TABINV_E_PARSE:
      return "parse error";
    case TABINV_E_INVALID_TABLE:
      return "invalid table";
    case TABINV_E_PERMUTATION_SIZE:
      return "permutation size mismatch";
    case TABINV_E_OUT_OF_RANGE:
      return "out of range";
    case TABINV_E_NO_HIGHLIGHT:
      return "no highlighted cells";
    case TABINV_E_INVALID_PMAX:
      return "invalid p_max";
    case TABINV_E_DIMENSION:
      return "dimension mismatch";
    case TABINV_E_EMPTY_BATCH:
      return "empty batch";
    case TABINV_E_NON_FINITE:
      return "non-finite loss";
    case TABINV_E_LENGTH_MISMATCH:
      return "length mismatch";
    case TABINV_E_IO:
      return "i/o error";
    case TABINV_E_INVARIANT:
      return "invariant violated";
    case TABINV_E_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

void tabinv_string_free(char* s) { std::free(s); }

tabinv_status tabinv_format_parse(const char* name, tabinv_format* out) {
  return guarded([&] {
    require(name != nullptr && out != nullptr, "null argument");
    *out = from_format(tabinv::parse_format(name));
  });
}

// ----------------------------------------------------------------- tables

tabinv_status tabinv_table_from_json(const char* json, tabinv_table** out) {
  return guarded([&] {
    require(json != nullptr && out != nullptr, "null argument");
    *out = wrap(tabinv::table_from_json(json));
  });
}

tabinv_status tabinv_table_to_json(const tabinv_table* table, char** out) {
  return guarded([&] {
    require(table != nullptr && out != nullptr, "null argument");
    *out = dup_string(tabinv::table_to_json(table->value));
  });
}

void tabinv_table_free(tabinv_table* table) { delete table; }

size_t tabinv_table_rows(const tabinv_table* table) {
  return table == nullptr ? 0 : table->value.n_rows();
}

size_t tabinv_table_cols(const tabinv_table* table) {
  return table == nullptr ? 0 : table->value.n_cols();
}

tabinv_status tabinv_table_transpose(const tabinv_table* table,
                                     tabinv_table** out) {
  return guarded([&] {
    require(table != nullptr && out != nullptr, "null argument");
    *out = wrap(tabinv::transpose(table->value));
  });
}

tabinv_status tabinv_table_shuffle_rows(const tabinv_table* table,
                                        const size_t* perm, size_t n,
                                        tabinv_table** out) {
  return guarded([&] {
    require(table != nullptr && out != nullptr, "null argument");
    require(perm != nullptr || n == 0, "null permutation");
    std::vector<std::size_t> p(perm, perm + n);
    *out = wrap(tabinv::shuffle_rows(table->value, p));
  });
}

tabinv_status tabinv_table_shuffle_cols(const tabinv_table* table,
                                        const size_t* perm, size_t n,
                                        tabinv_table** out) {
  return guarded([&] {
    require(table != nullptr && out != nullptr, "null argument");
    require(perm != nullptr || n == 0, "null permutation");
    std::vector<std::size_t> p(perm, perm + n);
    *out = wrap(tabinv::shuffle_cols(table->value, p));
  });
}

tabinv_status tabinv_table_perturb(const tabinv_table* table, uint64_t seed,
                                   tabinv_table** out) {
  return guarded([&] {
    require(table != nullptr && out != nullptr, "null argument");
    *out = wrap(tabinv::perturb(table->value, seed));
  });
}

tabinv_status tabinv_table_augment(const tabinv_table* table, uint64_t seed,
                                   tabinv_table* out[8]) {
  return guarded([&] {
    require(table != nullptr && out != nullptr, "null argument");
    auto tables = tabinv::enumerate_augmentations(table->value, seed);
    std::vector<tabinv_table*> made;
    try {
      for (auto& t : tables) made.push_back(wrap(std::move(t)));
    } catch (...) {
      for (auto* p : made) delete p;
      throw;
    }
    for (std::size_t i = 0; i < 8; ++i) out[i] = made[i];
  });
}

tabinv_status tabinv_table_related(const tabinv_table* table, size_t row_a,
                                   size_t col_a, size_t row_b, size_t col_b,
                                   int* out) {
  return guarded([&] {
    require(table != nullptr && out != nullptr, "null argument");
    *out = tabinv::structurally_related(table->value, {row_a, col_a},
                                        {row_b, col_b})
               ? 1
               : 0;
  });
}

// --------------------------------------------------------------- datasets

void tabinv_corpus_spec_default(tabinv_corpus_spec* spec) {
  if (spec == nullptr) return;
  tabinv::CorpusSpec d;
  spec->n_tables = 100;
  spec->min_rows = d.min_rows;
  spec->max_rows = d.max_rows;
  spec->min_cols = d.min_cols;
  spec->max_cols = d.max_cols;
  spec->family = static_cast<int>(d.family);
  spec->min_highlight = d.min_highlight;
  spec->max_highlight = d.max_highlight;
  spec->seed = d.seed;
}

tabinv_status tabinv_generate_corpus(const tabinv_corpus_spec* spec,
                                     const char* out_path) {
  return guarded([&] {
    require(spec != nullptr && out_path != nullptr, "null argument");
    require(spec->family == 0 || spec->family == 1, "unknown family");
    tabinv::CorpusSpec s;
    s.n_tables = spec->n_tables;
    s.min_rows = spec->min_rows;
    s.max_rows = spec->max_rows;
    s.min_cols = spec->min_cols;
    s.max_cols = spec->max_cols;
    s.family = static_cast<tabinv::TemplateFamily>(spec->family);
    s.min_highlight = spec->min_highlight;
    s.max_highlight = spec->max_highlight;
    s.seed = spec->seed;
    tabinv::write_jsonl_file(out_path, tabinv::generate_corpus(s));
  });
}

tabinv_status tabinv_augment_file(const char* in_path, const char* out_path,
                                  uint64_t seed) {
  return guarded([&] {
    require(in_path != nullptr && out_path != nullptr, "null argument");
    auto data = tabinv::read_jsonl_file(in_path);
    tabinv::write_jsonl_file(out_path, tabinv::augment_dataset(data, seed));
  });
}

tabinv_status tabinv_perturb_file(const char* in_path, const char* out_path,
                                  uint64_t seed) {
  return guarded([&] {
    require(in_path != nullptr && out_path != nullptr, "null argument");
    auto data = tabinv::read_jsonl_file(in_path);
    tabinv::write_jsonl_file(out_path, tabinv::perturb_dataset(data, seed));
  });
}

tabinv_status tabinv_import_totto_file(const char* in_path,
                                       const char* out_path) {
  return guarded([&] {
    require(in_path != nullptr && out_path != nullptr, "null argument");
    std::ifstream in(in_path);
    if (!in) {
      throw tabinv::Error(tabinv::ErrorCode::kIo,
                          std::string("cannot open ") + in_path);
    }
    std::vector<tabinv::Example> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        out.push_back(tabinv::example_from_totto_json(line));
      } catch (const tabinv::Error& e) {
        throw tabinv::Error(e.code(), "line " + std::to_string(lineno) +
                                          ": " + e.what());
      }
    }
    tabinv::write_jsonl_file(out_path, out);
  });
}

tabinv_status tabinv_dataset_count(const char* path, size_t* out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = tabinv::read_jsonl_file(path).size();
  });
}

// ------------------------------------------------------------- vocabulary

tabinv_status tabinv_vocab_from_dataset(const char* dataset_path,
                                        tabinv_vocab** out) {
  return guarded([&] {
    require(dataset_path != nullptr && out != nullptr, "null argument");
    auto data = tabinv::read_jsonl_file(dataset_path);
    *out = new tabinv_vocab{tabinv::build_vocabulary(data)};
  });
}

tabinv_status tabinv_vocab_from_datasets(const char* const* paths, size_t n,
                                         tabinv_vocab** out) {
  return guarded([&] {
    require(paths != nullptr && out != nullptr && n > 0, "null argument");
    std::vector<tabinv::Example> data;
    for (std::size_t i = 0; i < n; ++i) {
      require(paths[i] != nullptr, "null path");
      auto part = tabinv::read_jsonl_file(paths[i]);
      data.insert(data.end(), std::make_move_iterator(part.begin()),
                  std::make_move_iterator(part.end()));
    }
    *out = new tabinv_vocab{tabinv::build_vocabulary(data)};
  });
}

tabinv_status tabinv_vocab_load(const char* path, tabinv_vocab** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new tabinv_vocab{tabinv::Vocabulary::load(path)};
  });
}

tabinv_status tabinv_vocab_save(const tabinv_vocab* vocab, const char* path) {
  return guarded([&] {
    require(vocab != nullptr && path != nullptr, "null argument");
    vocab->value.save(path);
  });
}

size_t tabinv_vocab_size(const tabinv_vocab* vocab) {
  return vocab == nullptr ? 0 : vocab->value.size();
}

void tabinv_vocab_free(tabinv_vocab* vocab) { delete vocab; }

// ---------------------------------------------------------- linearization

tabinv_status tabinv_linearize(const tabinv_table* table,
                               const tabinv_vocab* vocab, tabinv_format format,
                               size_t max_len, tabinv_sequence** out) {
  return guarded([&] {
    require(table != nullptr && vocab != nullptr && out != nullptr,
            "null argument");
    auto seq = tabinv::linearize(table->value, vocab->value, to_format(format));
    seq = tabinv::truncate(
        seq, max_len == 0 ? tabinv::kDefaultMaxInputLength : max_len);
    tabinv::check_field_map(seq);
    *out = new tabinv_sequence{std::move(seq)};
  });
}

size_t tabinv_sequence_length(const tabinv_sequence* seq) {
  return seq == nullptr ? 0 : seq->value.size();
}

tabinv_status tabinv_sequence_to_json(const tabinv_sequence* seq, char** out) {
  return guarded([&] {
    require(seq != nullptr && out != nullptr, "null argument");
    const auto& s = seq->value;
    nlohmann::json j;
    j["tokens"] = s.token_texts;
    j["ids"] = s.token_ids;
    j["field_of"] = s.field_of;
    nlohmann::json fields = nlohmann::json::array();
    for (const auto& f : s.fields) {
      fields.push_back({{"kind", f.is_metadata() ? "metadata" : "cell"},
                        {"row_ids", f.row_ids},
                        {"col_ids", f.col_ids},
                        {"content_hash", f.content_hash}});
    }
    j["fields"] = std::move(fields);
    *out = dup_string(j.dump());
  });
}

tabinv_status tabinv_structure_to_json(const tabinv_sequence* seq, int p_max,
                                       char** out) {
  return guarded([&] {
    require(seq != nullptr && out != nullptr, "null argument");
    auto mask = tabinv::build_mask(seq->value);
    auto relpos = tabinv::build_relpos(seq->value, p_max);
    *out = dup_string(tabinv::structure_to_json(mask, relpos));
  });
}

void tabinv_sequence_free(tabinv_sequence* seq) { delete seq; }

// ------------------------------------------------------------------ model

void tabinv_model_config_default(tabinv_model_config* config) {
  if (config != nullptr) *config = from_config(tabinv::ModelConfig{});
}

tabinv_status tabinv_model_create(const tabinv_model_config* config,
                                  const tabinv_vocab* vocab,
                                  tabinv_format format, size_t max_input_len,
                                  tabinv_model** out) {
  return guarded([&] {
    require(config != nullptr && vocab != nullptr && out != nullptr,
            "null argument");
    *out = new tabinv_model{tabinv::Generator(
        to_config(*config), vocab->value, to_format(format),
        max_input_len == 0 ? tabinv::kDefaultMaxInputLength : max_input_len)};
  });
}

tabinv_status tabinv_model_load(const char* path, tabinv_model** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new tabinv_model{tabinv::load_checkpoint(path)};
  });
}

tabinv_status tabinv_model_save(const tabinv_model* model, const char* path) {
  return guarded([&] {
    require(model != nullptr && path != nullptr, "null argument");
    tabinv::save_checkpoint(model->value, path);
  });
}

tabinv_status tabinv_model_get_config(const tabinv_model* model,
                                      tabinv_model_config* out) {
  return guarded([&] {
    require(model != nullptr && out != nullptr, "null argument");
    *out = from_config(model->value.model().config());
  });
}

tabinv_format tabinv_model_format(const tabinv_model* model) {
  return model == nullptr ? TABINV_FORMAT_TOTTO
                          : from_format(model->value.format());
}

size_t tabinv_model_parameter_count(const tabinv_model* model) {
  return model == nullptr ? 0 : model->value.model().params().count();
}

void tabinv_model_free(tabinv_model* model) { delete model; }

void tabinv_train_options_default(tabinv_train_options* options) {
  if (options == nullptr) return;
  tabinv::TrainOptions d;
  options->steps = d.steps;
  options->batch_size = d.batch_size;
  options->learning_rate = d.learning_rate;
  options->seed = d.seed;
  options->log_every = d.log_every;
  options->progress = nullptr;
  options->progress_user = nullptr;
}

tabinv_status tabinv_model_train(tabinv_model* model, const char* dataset_path,
                                 const tabinv_train_options* options,
                                 double* final_loss) {
  return guarded([&] {
    require(model != nullptr && dataset_path != nullptr && options != nullptr,
            "null argument");
    auto data = tabinv::read_jsonl_file(dataset_path);
    auto losses = tabinv::train(model->value, data, to_options(*options));
    if (final_loss != nullptr) {
      *final_loss = losses.empty() ? 0.0 : losses.back();
    }
  });
}

tabinv_status tabinv_model_loss(const tabinv_model* model,
                                const char* dataset_path, double* out) {
  return guarded([&] {
    require(model != nullptr && dataset_path != nullptr && out != nullptr,
            "null argument");
    auto data = tabinv::read_jsonl_file(dataset_path);
    std::vector<tabinv::TrainingExample> batch;
    batch.reserve(data.size());
    for (const auto& ex : data) {
      batch.push_back(model->value.training_example(ex));
    }
    *out = tabinv::nll_loss(model->value.model(), batch);
  });
}

tabinv_status tabinv_model_generate(const tabinv_model* model,
                                    const tabinv_table* table, size_t beam,
                                    size_t max_len, char** out) {
  return guarded([&] {
    require(model != nullptr && table != nullptr && out != nullptr,
            "null argument");
    *out = dup_string(model->value.generate(table->value, beam, max_len));
  });
}

tabinv_status tabinv_model_decode_file(const tabinv_model* model,
                                       const char* dataset_path,
                                       const char* out_path, size_t beam,
                                       size_t max_len, double* bleu) {
  return guarded([&] {
    require(model != nullptr && dataset_path != nullptr && out_path != nullptr,
            "null argument");
    auto data = tabinv::read_jsonl_file(dataset_path);
    std::vector<std::string> gens;
    std::vector<std::string> refs;
    std::ofstream out(out_path);
    if (!out) {
      throw tabinv::Error(tabinv::ErrorCode::kIo,
                          std::string("cannot write ") + out_path);
    }
    for (const auto& ex : data) {
      gens.push_back(model->value.generate(ex.table, beam, max_len));
      refs.push_back(tabinv::normalize_text(ex.target));
      nlohmann::json j{{"generation", gens.back()},
                       {"reference", refs.back()}};
      out << j.dump() << '\n';
    }
    if (bleu != nullptr) {
      *bleu = data.empty() ? 0.0 : tabinv::bleu4(gens, refs);
    }
  });
}

// ------------------------------------------------------------- evaluation

tabinv_status tabinv_bleu4(const char* const* candidates,
                           const char* const* references, size_t n,
                           double* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    require(n == 0 || (candidates != nullptr && references != nullptr),
            "null argument");
    std::vector<std::string> c;
    std::vector<std::string> r;
    for (std::size_t i = 0; i < n; ++i) {
      require(candidates[i] != nullptr && references[i] != nullptr,
              "null string");
      c.emplace_back(candidates[i]);
      r.emplace_back(references[i]);
    }
    *out = tabinv::bleu4(c, r);
  });
}

tabinv_status tabinv_eval_robustness(const tabinv_model* model,
                                     const char* dataset_path, uint64_t seed,
                                     size_t beam, const char* generations_path,
                                     tabinv_eval_report* out) {
  return guarded([&] {
    require(model != nullptr && dataset_path != nullptr && out != nullptr,
            "null argument");
    auto data = tabinv::read_jsonl_file(dataset_path);
    auto report = tabinv::run_robustness_eval(model->value, data, seed, beam);
    if (generations_path != nullptr) {
      std::ofstream f(generations_path);
      if (!f) {
        throw tabinv::Error(tabinv::ErrorCode::kIo,
                            std::string("cannot write ") + generations_path);
      }
      for (std::size_t i = 0; i < report.references.size(); ++i) {
        nlohmann::json j{{"reference", report.references[i]},
                         {"origin", report.origin_generations[i]},
                         {"transform", report.transform_generations[i]}};
        f << j.dump() << '\n';
      }
    }
    fill_report(report, out);
  });
}

tabinv_status tabinv_run_ablation(const char* train_path,
                                  const char* test_path,
                                  const tabinv_model_config* base,
                                  const tabinv_train_options* options,
                                  uint64_t seed, size_t beam,
                                  tabinv_ablation_row out[3]) {
  return guarded([&] {
    require(train_path != nullptr && test_path != nullptr && base != nullptr &&
                options != nullptr && out != nullptr,
            "null argument");
    auto train = tabinv::read_jsonl_file(train_path);
    auto test = tabinv::read_jsonl_file(test_path);
    auto rows = tabinv::run_ablation(train, test, to_config(*base),
                                     to_options(*options), seed, beam);
    require(rows.size() == 3, "unexpected ablation grid size");
    for (std::size_t i = 0; i < 3; ++i) {
      std::memset(out[i].name, 0, sizeof(out[i].name));
      std::strncpy(out[i].name, rows[i].name.c_str(),
                   sizeof(out[i].name) - 1);
      out[i].format = from_format(rows[i].format);
      out[i].use_structure_mask = rows[i].use_structure_mask ? 1 : 0;
      out[i].use_invariant_relpos = rows[i].use_invariant_relpos ? 1 : 0;
      out[i].final_loss = rows[i].final_loss;
      fill_report(rows[i].report, &out[i].report);
    }
  });
}

}  // extern "C"
