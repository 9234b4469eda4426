// Copyright 2026 The XEL Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "xel/cli.h"

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <unordered_set>

#include "CLI11.hpp"
#include "json.hpp"
#include "xel/burn.h"
#include "xel/candgen.h"
#include "xel/corpus.h"
#include "xel/error.h"
#include "xel/eval.h"
#include "xel/features.h"
#include "xel/gradcheck.h"
#include "xel/kb_stats.h"
#include "xel/linear_greedy.h"
#include "xel/model_io.h"
#include "xel/parallel.h"
#include "xel/trainer.h"

#ifndef XEL_GIT_COMMIT
#define XEL_GIT_COMMIT "unknown"
#endif

namespace xel {

using json = nlohmann::json;

namespace {

constexpr char kVersion[] = "1.0.0";

// Reads --config files written as JSON. Top-level objects name subcommands:
//   {"train": {"epochs": 30, "seed": 7}, "link": {"jobs": 4}}
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App *, bool, bool,
                        std::string) const override {
    return "{}\n";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream &input) const override {
    json j;
    try {
      j = json::parse(input);
    } catch (const json::exception &e) {
      throw CLI::ConfigError(std::string("config is not valid JSON: ") +
                             e.what());
    }
    if (!j.is_object()) throw CLI::ConfigError("config must be a JSON object");
    std::vector<CLI::ConfigItem> items;
    Collect(j, {}, items);
    return items;
  }

 private:
  static std::string Scalar(const json &value) {
    if (value.is_string()) return value.get<std::string>();
    if (value.is_boolean()) return value.get<bool>() ? "true" : "false";
    return value.dump();
  }

  static void Collect(const json &object, const std::vector<std::string> &parents,
                      std::vector<CLI::ConfigItem> &items) {
    for (const auto &[key, value] : object.items()) {
      if (value.is_object()) {
        std::vector<std::string> nested = parents;
        nested.push_back(key);
        Collect(value, nested, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const json &v : value) item.inputs.push_back(Scalar(v));
      } else {
        item.inputs.push_back(Scalar(value));
      }
      items.push_back(std::move(item));
    }
  }
};

void WriteText(const std::string &path, const std::string &text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.flush();
  if (!out) throw Error("cannot write " + path);
}

std::optional<EmbeddingStore> MaybeEmbeddings(const std::string &path) {
  if (path.empty()) return std::nullopt;
  return EmbeddingStore::Load(path);
}

struct BuildStatsOptions {
  std::string anchors, out;
  double epsilon = KbStatistics::kDefaultEpsilon;
  double smoothing = KbStatistics::kDefaultSmoothing;
  int jobs = 1;
};

void BuildStats(const BuildStatsOptions &o) {
  const std::vector<AnchorPage> pages = ReadAnchorPages(o.anchors);
  const size_t shards = std::max<size_t>(1, std::min<size_t>(o.jobs, pages.size()));
  std::vector<KbStatistics> partial(shards);
  ParallelFor(shards, o.jobs, [&](size_t s) {
    const size_t begin = pages.size() * s / shards;
    const size_t end = pages.size() * (s + 1) / shards;
    partial[s] = Ingest(std::span(pages).subspan(begin, end - begin), o.epsilon,
                        o.smoothing);
  });
  KbStatistics stats = partial[0];
  for (size_t s = 1; s < shards; ++s) stats = Merge(stats, partial[s]);
  SaveStats(stats, o.out);
  std::cout << "pages " << pages.size() << " entities "
            << stats.entity_count.size() << " anchors "
            << stats.total_anchor_count << " pairs " << stats.pair_count.size()
            << "\n";
}

struct BuildDictionaryOptions {
  std::string anchors, bimap, out;
};

void BuildDictionary(const BuildDictionaryOptions &o) {
  const BilingualMap bimap = ReadBilingualMap(o.bimap);
  WikiMentionBuilder builder;
  ForEachAnchorPage(o.anchors,
                    [&](const AnchorPage &page) { builder.AddPage(page, bimap); });
  builder.map.Save(o.out);
  std::cout << "surfaces " << builder.map.size() << " anchors kept "
            << builder.kept << " dropped " << builder.dropped << "\n";
}

struct CandidatesOptions {
  std::string corpus, dictionary, out;
  std::vector<std::string> external;
  int k = 30;
  double gamma = 1.0;
};

void Candidates(const CandidatesOptions &o) {
  std::vector<Document> docs = ReadCorpus(o.corpus);
  std::optional<MentionEntityMap> dictionary;
  if (!o.dictionary.empty()) dictionary = MentionEntityMap::Load(o.dictionary);
  std::vector<ExternalScores> external;
  for (const std::string &path : o.external) {
    external.push_back(ReadExternalScores(path));
  }
  GenerateCandidates(docs, dictionary ? &*dictionary : nullptr, external,
                     {o.k, o.gamma});
  WriteCorpus(docs, o.out);
}

struct LinkOptions {
  std::string corpus, stats, embeddings, model, out, inference;
  int iterations = 20;
  size_t context = 30;
  int jobs = 1;
};

void Link(const LinkOptions &o) {
  const Model model = LoadModel(o.model);
  const std::string kind = model.is_burn() ? "burn" : "greedy";
  if (!o.inference.empty() && o.inference != kind) {
    throw Error("--inference " + o.inference + " does not match the " + kind +
                " model in " + o.model);
  }
  const std::vector<Document> docs = ReadCorpus(o.corpus);
  const KbStatistics stats = LoadStats(o.stats);
  const std::optional<EmbeddingStore> embeddings = MaybeEmbeddings(o.embeddings);
  const FeatureExtractor extractor(stats, embeddings ? &*embeddings : nullptr,
                                   model.feature_set);
  InferenceConfig inference;
  inference.max_iterations = o.iterations;
  inference.context_window = o.context;
  inference.Validate();

  std::vector<std::vector<std::optional<size_t>>> chosen(docs.size());
  ParallelFor(docs.size(), o.jobs, [&](size_t d) {
    if (const auto *burn = std::get_if<BurnParams>(&model.params)) {
      const FeatureTensors t = Featurize(docs[d], extractor, o.context);
      chosen[d] = Infer(t, *burn, inference).Predictions(t);
    } else {
      const FeatureTensors t = Featurize(docs[d], extractor, 0);
      for (const MentionScores &s :
           GreedyLink(t, std::get<LinearParams>(model.params))) {
        chosen[d].push_back(s.prediction);
      }
    }
  });
  Predictions predictions;
  for (size_t d = 0; d < docs.size(); ++d) {
    for (size_t i = 0; i < docs[d].mentions.size(); ++i) {
      const Mention &m = docs[d].mentions[i];
      if (chosen[d][i]) {
        predictions.insert_or_assign({docs[d].id, m.id},
                                     m.candidates[*chosen[d][i]].entity);
      }
    }
  }
  WriteLinked(docs, predictions, std::filesystem::path(o.out));
}

struct TrainOptions {
  std::string corpus, stats, embeddings, out, log;
  std::string inference = "burn";
  std::string feature_set = "FEAT";
  int hidden = 128;
  double dropout = 0.5;
  double lr = 1e-3;
  int epochs = 10;
  uint64_t seed = 0;
  size_t batch_size = 0;
  int iterations = 20;
  size_t context = 30;
  int jobs = 1;
};

void Train(const TrainOptions &o) {
  if (o.inference != "burn" && o.inference != "greedy") {
    throw Error("unknown inference '" + o.inference + "'");
  }
  const bool burn = o.inference == "burn";
  const FeatureSet set = ParseFeatureSet(o.feature_set);
  const std::vector<Document> docs = ReadCorpus(o.corpus);
  const KbStatistics stats = LoadStats(o.stats);
  const std::optional<EmbeddingStore> embeddings = MaybeEmbeddings(o.embeddings);
  const FeatureExtractor extractor(stats, embeddings ? &*embeddings : nullptr, set);

  std::vector<TrainingExample> examples(docs.size());
  ParallelFor(docs.size(), o.jobs, [&](size_t d) {
    examples[d] = MakeExample(docs[d], extractor, burn ? o.context : 0);
  });

  TrainConfig config;
  config.epochs = o.epochs;
  config.lr = o.lr;
  config.dropout = o.dropout;
  config.seed = o.seed;
  config.batch_size = o.batch_size;
  config.jobs = o.jobs;
  InferenceConfig inference;
  inference.max_iterations = o.iterations;
  inference.context_window = o.context;

  Model model;
  model.feature_set = set;
  model.train_config = {{"inference", o.inference},
                        {"feature_set", o.feature_set},
                        {"epochs", o.epochs},
                        {"lr", o.lr},
                        {"seed", o.seed},
                        {"batch_size", o.batch_size},
                        {"adam", {{"beta1", config.beta1},
                                  {"beta2", config.beta2},
                                  {"eps", config.adam_eps}}}};
  TrainLog log;
  if (burn) {
    model.train_config["hidden"] = o.hidden;
    model.train_config["dropout"] = o.dropout;
    model.train_config["T"] = o.iterations;
    model.train_config["context"] = o.context;
    model.train_config["convergence_tol"] = inference.convergence_tol;
    BurnTrainResult r = TrainBurn(
        examples,
        BurnParams::Initialize(UnaryDim(set), BinaryDim(set), o.hidden, o.seed),
        inference, config);
    model.params = std::move(r.params);
    log = std::move(r.log);
  } else {
    LinearTrainResult r = TrainLinear(
        examples, LinearParams::Zeros(UnaryDim(set), BinaryDim(set)), config);
    model.params = std::move(r.params);
    log = std::move(r.log);
  }
  SaveModel(model, o.out);

  json epochs = json::array();
  for (const EpochLog &e : log.epochs) {
    epochs.push_back({{"epoch", e.epoch}, {"loss", e.loss}, {"accuracy", e.accuracy}});
    std::cout << "epoch " << e.epoch << " loss " << e.loss << " accuracy "
              << e.accuracy << "\n";
  }
  if (!o.log.empty()) {
    const json j = {{"initial_loss", log.initial_loss},
                    {"initial_accuracy", log.initial_accuracy},
                    {"counted_mentions", log.counted},
                    {"excluded_mentions", log.excluded},
                    {"epochs", epochs}};
    WriteText(o.log, j.dump(1) + "\n");
  }
}

struct EvalOptions {
  std::string corpus, predictions, stats, dictionary, out;
  int jobs = 1;
};

void Eval(const EvalOptions &o) {
  const std::vector<Document> docs = ReadCorpus(o.corpus);
  const Predictions predictions = ReadPredictions(o.predictions);
  std::optional<KbStatistics> stats;
  if (!o.stats.empty()) stats = LoadStats(o.stats);
  std::unordered_set<EntityId> dictionary_entities;
  if (!o.dictionary.empty()) {
    for (const auto &[surface, entities] :
         MentionEntityMap::Load(o.dictionary).table()) {
      for (const auto &[entity, count] : entities) {
        dictionary_entities.insert(entity);
      }
    }
  }
  KbMembership in_kb;
  if (stats || !o.dictionary.empty()) {
    in_kb = [&](const EntityId &e) {
      return (stats && stats->entity_count.contains(e)) ||
             dictionary_entities.contains(e);
    };
  }
  const EvalReport report = Evaluate(docs, predictions, in_kb, o.jobs);

  json per_document = json::array();
  for (const DocumentEval &d : report.per_document) {
    per_document.push_back({{"doc_id", d.doc_id},
                            {"n_mentions", d.n_mentions},
                            {"n_in_kb", d.n_in_kb},
                            {"covered", d.covered},
                            {"correct", d.correct}});
  }
  const json j = {
      {"n_mentions", report.n_mentions},
      {"n_in_kb", report.n_in_kb},
      {"covered", report.covered},
      {"correct", report.correct},
      {"gold_recall", report.gold_recall},
      {"accuracy", report.accuracy},
      {"predictions_from_candidates", report.predictions_from_candidates},
      {"per_document", per_document},
      {"config",
       {{"corpus", o.corpus},
        {"predictions", o.predictions},
        {"stats", o.stats},
        {"dictionary", o.dictionary}}},
      {"run", {{"tool", "xel"}, {"version", kVersion}, {"git_commit", XEL_GIT_COMMIT}}}};
  WriteText(o.out, j.dump(2) + "\n");
}

struct GradCheckOptions {
  uint64_t seed = 7;
  GradCheckConfig config;
};

bool GradCheck(const GradCheckOptions &o) {
  const GradCheckResult r = RunGradCheck(o.seed, o.config);
  std::cout << "instances " << r.instances << " coordinates " << r.coordinates
            << " max_relative_error " << r.max_relative_error << " "
            << (r.passed ? "PASS" : "FAIL") << "\n";
  return r.passed;
}

}  // namespace

int RunCli(int argc, const char *const *argv) {
  CLI::App app{"Cross-lingual entity linking toolkit", "xel"};
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON config; command-line flags take precedence");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  BuildStatsOptions build_stats;
  auto *cmd = app.add_subcommand("build-stats", "Ingest anchor pages into a statistics store");
  cmd->add_option("--anchors", build_stats.anchors, "Anchor corpus JSONL")
      ->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", build_stats.out, "Store directory")->required();
  cmd->add_option("--epsilon", build_stats.epsilon, "Log clamp")->capture_default_str();
  cmd->add_option("--smoothing", build_stats.smoothing, "Unigram smoothing exponent")
      ->capture_default_str();
  cmd->add_option("--jobs", build_stats.jobs, "Ingestion shards")->check(CLI::PositiveNumber);

  BuildDictionaryOptions build_dictionary;
  cmd = app.add_subcommand("build-dictionary",
                           "Build the mention-entity dictionary from source-language anchors");
  cmd->add_option("--anchors", build_dictionary.anchors, "Source-language anchor JSONL")
      ->required()->check(CLI::ExistingFile);
  cmd->add_option("--bimap", build_dictionary.bimap, "Bilingual entity map TSV")
      ->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", build_dictionary.out, "Dictionary TSV")->required();

  CandidatesOptions candidates;
  cmd = app.add_subcommand("candidates", "Generate and fuse candidate lists");
  cmd->add_option("--corpus", candidates.corpus, "Corpus JSONL")
      ->required()->check(CLI::ExistingFile);
  cmd->add_option("--dictionary", candidates.dictionary, "Dictionary TSV")
      ->check(CLI::ExistingFile);
  cmd->add_option("--external", candidates.external, "External candidate scores JSONL")
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", candidates.out, "Output corpus JSONL")->required();
  cmd->add_option("--K", candidates.k, "Candidates kept per mention")
      ->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--gamma", candidates.gamma, "Calibration peakiness")
      ->capture_default_str()->check(CLI::PositiveNumber);

  LinkOptions link;
  cmd = app.add_subcommand("link", "Disambiguate a corpus with a trained model");
  cmd->add_option("--corpus", link.corpus, "Corpus JSONL with candidates")
      ->required()->check(CLI::ExistingFile);
  cmd->add_option("--stats", link.stats, "Statistics store")
      ->required()->check(CLI::ExistingDirectory);
  cmd->add_option("--embeddings", link.embeddings, "Entity embeddings")
      ->check(CLI::ExistingFile);
  cmd->add_option("--model", link.model, "Model JSON")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", link.out, "Predictions JSONL")->required();
  cmd->add_option("--inference", link.inference, "greedy or burn (must match the model)")
      ->check(CLI::IsMember({"greedy", "burn"}));
  cmd->add_option("--T", link.iterations, "Maximum inference iterations")
      ->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--context", link.context, "Context mentions per mention")
      ->capture_default_str();
  cmd->add_option("--jobs", link.jobs, "Worker threads")->check(CLI::PositiveNumber);

  TrainOptions train;
  cmd = app.add_subcommand("train", "Train a BURN or linear greedy model");
  cmd->add_option("--corpus", train.corpus, "Labeled corpus JSONL with candidates")
      ->required()->check(CLI::ExistingFile);
  cmd->add_option("--stats", train.stats, "Statistics store")
      ->required()->check(CLI::ExistingDirectory);
  cmd->add_option("--embeddings", train.embeddings, "Entity embeddings")
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", train.out, "Model JSON")->required();
  cmd->add_option("--log", train.log, "Training log JSON");
  cmd->add_option("--inference", train.inference, "burn or greedy")
      ->capture_default_str()->check(CLI::IsMember({"greedy", "burn"}));
  cmd->add_option("--feature-set", train.feature_set, "BASE or FEAT")
      ->capture_default_str()->check(CLI::IsMember({"BASE", "FEAT"}));
  cmd->add_option("--hidden", train.hidden, "Hidden units")
      ->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--dropout", train.dropout, "Hidden dropout rate")
      ->capture_default_str()->check(CLI::Range(0.0, 0.999));
  cmd->add_option("--lr", train.lr, "Adam learning rate")
      ->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--epochs", train.epochs, "Epochs")->capture_default_str();
  cmd->add_option("--seed", train.seed, "Random seed")->capture_default_str();
  cmd->add_option("--batch-size", train.batch_size, "Documents per update (0 = all)")
      ->capture_default_str();
  cmd->add_option("--T", train.iterations, "Maximum inference iterations")
      ->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--context", train.context, "Context mentions per mention")
      ->capture_default_str();
  cmd->add_option("--jobs", train.jobs, "Worker threads")->check(CLI::PositiveNumber);

  EvalOptions eval;
  cmd = app.add_subcommand("eval", "Gold candidate recall and in-KB accuracy");
  cmd->add_option("--corpus", eval.corpus, "Gold corpus JSONL with candidates")
      ->required()->check(CLI::ExistingFile);
  cmd->add_option("--predictions", eval.predictions, "Predictions JSONL")
      ->required()->check(CLI::ExistingFile);
  cmd->add_option("--stats", eval.stats, "KB membership from a statistics store")
      ->check(CLI::ExistingDirectory);
  cmd->add_option("--dictionary", eval.dictionary, "KB membership from a dictionary")
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", eval.out, "Report JSON (default stdout)");
  cmd->add_option("--jobs", eval.jobs, "Worker threads")->check(CLI::PositiveNumber);

  GradCheckOptions gradcheck;
  cmd = app.add_subcommand("gradcheck", "Check BURN gradients against finite differences");
  cmd->add_option("--seed", gradcheck.seed, "Random seed")->capture_default_str();
  cmd->add_option("--instances", gradcheck.config.instances, "Random instances")
      ->capture_default_str()->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      app.exit(e);
      return 0;
    }
    std::cerr << "error: " << e.what() << "\n";
    std::cerr << "Run with --help for usage.\n";
    return 2;
  }

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "build-stats") BuildStats(build_stats);
    if (name == "build-dictionary") BuildDictionary(build_dictionary);
    if (name == "candidates") Candidates(candidates);
    if (name == "link") Link(link);
    if (name == "train") Train(train);
    if (name == "eval") Eval(eval);
    if (name == "gradcheck") return GradCheck(gradcheck) ? 0 : 1;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int RunCli(const std::vector<std::string> &args) {
  std::vector<const char *> argv;
  argv.push_back("xel");
  for (const std::string &a : args) argv.push_back(a.c_str());
  return RunCli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace xel
