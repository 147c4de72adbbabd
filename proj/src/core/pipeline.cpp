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

#include "pipeline.hpp"

#include <fstream>
#include <numeric>

#include "bleu.hpp"
#include "error.hpp"
#include "json.hpp"
#include "rng.hpp"

namespace tabinv {

using nlohmann::json;

namespace {

constexpr const char* kCheckpointFormat = "tabinv-checkpoint";
constexpr int kCheckpointVersion = 1;

std::vector<TokenId> target_ids(const std::string& target,
                                const Vocabulary& vocab) {
  std::vector<TokenId> ids = {Vocabulary::kBos};
  for (TokenId id : tokenize(target, vocab)) ids.push_back(id);
  ids.push_back(Vocabulary::kEos);
  return ids;
}

json config_json(const ModelConfig& c) {
  return {{"d_model", c.d_model},
          {"n_heads", c.n_heads},
          {"n_enc_layers", c.n_enc_layers},
          {"n_dec_layers", c.n_dec_layers},
          {"d_ff", c.d_ff},
          {"p_max", c.p_max},
          {"use_structure_mask", c.use_structure_mask},
          {"use_invariant_relpos", c.use_invariant_relpos},
          {"vocab_size", c.vocab_size},
          {"max_decode_len", c.max_decode_len},
          {"seed", c.seed}};
}

ModelConfig config_from(const json& j) {
  ModelConfig c;
  c.d_model = j.at("d_model").get<std::size_t>();
  c.n_heads = j.at("n_heads").get<std::size_t>();
  c.n_enc_layers = j.at("n_enc_layers").get<std::size_t>();
  c.n_dec_layers = j.at("n_dec_layers").get<std::size_t>();
  c.d_ff = j.at("d_ff").get<std::size_t>();
  c.p_max = j.at("p_max").get<int>();
  c.use_structure_mask = j.at("use_structure_mask").get<bool>();
  c.use_invariant_relpos = j.at("use_invariant_relpos").get<bool>();
  c.vocab_size = j.at("vocab_size").get<std::size_t>();
  c.max_decode_len = j.at("max_decode_len").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace

Vocabulary build_vocabulary(const std::vector<Example>& data) {
  std::vector<std::string> texts;
  for (const Example& ex : data) {
    texts.push_back(ex.table.page_title());
    texts.push_back(ex.table.section_title());
    for (const auto& row : ex.table.rows()) {
      for (const Cell& c : row) texts.push_back(c.content);
    }
    texts.push_back(ex.target);
  }
  return Vocabulary::build(texts);
}

Generator::Generator(ModelConfig config, Vocabulary vocab,
                     LinearizationFormat format, std::size_t max_input_len)
    : model_([&] {
        config.vocab_size = vocab.size();
        return ToyModel(config);
      }()),
      vocab_(std::move(vocab)),
      format_(format),
      max_input_len_(max_input_len) {
  if (max_input_len_ == 0) {
    throw Error(ErrorCode::kInvalidArgument, "max_input_len must be positive");
  }
}

Generator::Generator(ToyModel model, Vocabulary vocab,
                     LinearizationFormat format, std::size_t max_input_len)
    : model_(std::move(model)),
      vocab_(std::move(vocab)),
      format_(format),
      max_input_len_(max_input_len) {
  if (model_.config().vocab_size != vocab_.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "model vocabulary size does not match the vocabulary");
  }
  if (max_input_len_ == 0) {
    throw Error(ErrorCode::kInvalidArgument, "max_input_len must be positive");
  }
}

LinearizedSequence Generator::linearize(const Table& t) const {
  return truncate(tabinv::linearize(t, vocab_, format_), max_input_len_);
}

EncoderInput Generator::encoder_input(const Table& t) const {
  return make_encoder_input(linearize(t), model_.config().p_max);
}

TrainingExample Generator::training_example(const Example& ex) const {
  return make_training_example(linearize(ex.table), target_ids(ex.target, vocab_),
                               model_.config().p_max);
}

std::string Generator::generate(const Table& t, std::size_t beam,
                                std::size_t max_len) const {
  const EncoderInput input = encoder_input(t);
  const std::size_t limit = max_len == 0 ? model_.config().max_decode_len : max_len;
  const std::vector<TokenId> ids = beam <= 1
                                       ? greedy_decode(model_, input, limit)
                                       : beam_decode(model_, input, beam, limit);
  return detokenize(ids, vocab_);
}

std::vector<double> train(Generator& gen, const std::vector<Example>& data,
                          const TrainOptions& options) {
  if (data.empty()) throw Error(ErrorCode::kEmptyBatch, "no training data");
  if (options.batch_size == 0) {
    throw Error(ErrorCode::kInvalidArgument, "batch size must be positive");
  }
  std::vector<TrainingExample> prepared;
  prepared.reserve(data.size());
  for (const Example& ex : data) prepared.push_back(gen.training_example(ex));

  AdamOptimizer optimizer(options.learning_rate);
  Rng rng(options.seed);
  std::vector<std::size_t> order;
  std::size_t cursor = 0;
  std::vector<double> losses;
  losses.reserve(options.steps);
  std::vector<TrainingExample> batch;
  for (std::size_t step = 1; step <= options.steps; ++step) {
    batch.clear();
    while (batch.size() < options.batch_size) {
      if (cursor == order.size()) {
        order = rng.permutation(prepared.size());
        cursor = 0;
      }
      batch.push_back(prepared[order[cursor++]]);
    }
    const double loss = train_step(gen.model(), optimizer, batch);
    losses.push_back(loss);
    if (options.on_log && options.log_every > 0 &&
        (step % options.log_every == 0 || step == options.steps)) {
      options.on_log(step, loss);
    }
  }
  return losses;
}

void save_checkpoint(const Generator& gen, const std::string& path) {
  json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["config"] = config_json(gen.model().config());
  j["linearization"] = std::string(format_name(gen.format()));
  j["max_input_len"] = gen.max_input_len();
  j["vocab"] = gen.vocab().tokens();
  json params = json::array();
  const ParameterSet& p = gen.model().params();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Matrix& m = p.tensors[i];
    params.push_back({{"name", p.names[i]},
                      {"shape", {m.rows(), m.cols()}},
                      {"data", std::vector<double>(m.data(), m.data() + m.size())}});
  }
  j["params"] = std::move(params);
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write checkpoint " + path);
  out << j.dump();
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

Generator load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open checkpoint " + path);
  try {
    const json j = json::parse(in);
    if (j.at("format") != kCheckpointFormat ||
        j.at("version") != kCheckpointVersion) {
      throw Error(ErrorCode::kParse, path + " is not a version " +
                                         std::to_string(kCheckpointVersion) +
                                         " checkpoint");
    }
    const ModelConfig config = config_from(j.at("config"));
    ParameterSet params;
    for (const json& t : j.at("params")) {
      const auto rows = t.at("shape").at(0).get<Eigen::Index>();
      const auto cols = t.at("shape").at(1).get<Eigen::Index>();
      const std::vector<double> data = t.at("data").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "tensor " + t.at("name").get<std::string>() +
                        " has the wrong number of values");
      }
      params.names.push_back(t.at("name").get<std::string>());
      params.tensors.push_back(Eigen::Map<const Matrix>(data.data(), rows, cols));
    }
    return Generator(ToyModel(config, std::move(params)),
                     Vocabulary::from_tokens(j.at("vocab").get<std::vector<std::string>>()),
                     parse_format(j.at("linearization").get<std::string>()),
                     j.at("max_input_len").get<std::size_t>());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, path + ": " + e.what());
  }
}

EvalReport run_robustness_eval(const Generator& gen,
                               const std::vector<Example>& dev,
                               std::uint64_t seed, std::size_t beam,
                               std::size_t max_len) {
  if (dev.empty()) {
    throw Error(ErrorCode::kLengthMismatch, "evaluation set is empty");
  }
  const std::vector<Example> transformed = perturb_dataset(dev, seed);
  EvalReport report;
  report.equality_asserted = gen.layout_invariant_input();
  for (std::size_t i = 0; i < dev.size(); ++i) {
    report.references.push_back(normalize_text(dev[i].target));
    report.origin_generations.push_back(gen.generate(dev[i].table, beam, max_len));
    report.transform_generations.push_back(
        gen.generate(transformed[i].table, beam, max_len));
    if (report.origin_generations.back() != report.transform_generations.back()) {
      ++report.mismatches;
    }
  }
  report.bleu_origin = bleu4(report.origin_generations, report.references);
  report.bleu_transform = bleu4(report.transform_generations, report.references);
  report.delta = report.bleu_transform - report.bleu_origin;
  return report;
}

std::vector<AblationRow> ablation_grid() {
  std::vector<AblationRow> rows(3);
  rows[0].name = "baseline";
  rows[0].format = LinearizationFormat::kIndexed;
  rows[1].name = "att";
  rows[1].format = LinearizationFormat::kTotto;
  rows[1].use_structure_mask = true;
  rows[2].name = "att+pos";
  rows[2].format = LinearizationFormat::kTotto;
  rows[2].use_structure_mask = true;
  rows[2].use_invariant_relpos = true;
  return rows;
}

std::vector<AblationRow> run_ablation(
    const std::vector<Example>& train_data, const std::vector<Example>& test,
    const ModelConfig& base, const TrainOptions& options, std::uint64_t seed,
    std::size_t beam, const std::function<void(const AblationRow&)>& on_row) {
  const Vocabulary vocab = build_vocabulary(train_data);
  std::vector<AblationRow> rows = ablation_grid();
  for (AblationRow& row : rows) {
    ModelConfig config = base;
    config.use_structure_mask = row.use_structure_mask;
    config.use_invariant_relpos = row.use_invariant_relpos;
    Generator gen(config, vocab, row.format);
    const std::vector<double> losses = train(gen, train_data, options);
    row.final_loss = losses.empty() ? 0.0 : losses.back();
    row.report = run_robustness_eval(gen, test, seed, beam);
    if (on_row) on_row(row);
  }
  return rows;
}

}  // namespace tabinv
