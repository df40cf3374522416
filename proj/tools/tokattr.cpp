// tokattr: toy models, token attribution, POS features and detector training.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tokattr/detector/folds.hpp"
#include "tokattr/detector/gbdt.hpp"
#include "tokattr/detector/protocols.hpp"
#include "tokattr/detector/serialize.hpp"
#include "tokattr/error.hpp"
#include "tokattr/model/toy.hpp"
#include "tokattr/model/weight_io.hpp"
#include "tokattr/pipeline/analyze.hpp"
#include "tokattr/pipeline/features_csv.hpp"
#include "tokattr/pipeline/records.hpp"
#include "tokattr/pipeline/synthetic.hpp"
#include "tokattr/syntax/fallback_tagger.hpp"
#include "tokattr/syntax/sidecar.hpp"

namespace fs = std::filesystem;
using namespace tokattr;

namespace {

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const ShapeMismatchError*>(&e)) return "shape_mismatch";
  if (dynamic_cast<const ModelFormatError*>(&e)) return "model_format";
  if (dynamic_cast<const ConfigError*>(&e)) return "config";
  if (dynamic_cast<const NonFiniteError*>(&e)) return "non_finite";
  if (dynamic_cast<const IndexError*>(&e)) return "index";
  if (dynamic_cast<const SpanError*>(&e)) return "span";
  if (dynamic_cast<const DataError*>(&e)) return "data";
  if (dynamic_cast<const LeakageError*>(&e)) return "leakage";
  return "internal";
}

std::vector<std::string> read_lines(const fs::path& path) {
  auto in = open_in(path);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

// --- gen-toy ---------------------------------------------------------------

struct GenToyArgs {
  model::ModelConfig config;
  std::string norm = "layernorm";
  std::string positions = "learned_absolute";
  std::string ffn = "gelu";
  std::uint64_t seed = 0;
  fs::path words;
  bool synthetic_words = false;
  std::string storage = "f32";
  fs::path out;
};

void run_gen_toy(GenToyArgs& a) {
  a.config.norm_kind = model::parse_norm_kind(a.norm);
  a.config.position_kind = model::parse_position_kind(a.positions);
  a.config.ffn_kind = model::parse_ffn_kind(a.ffn);
  std::vector<std::string> words;
  if (a.synthetic_words) words = pipeline::synthetic_vocabulary();
  if (!a.words.empty()) {
    const auto extra = read_lines(a.words);
    words.insert(words.end(), extra.begin(), extra.end());
  }
  if (a.storage != "f32" && a.storage != "f64") throw ConfigError("storage must be f32 or f64");
  const auto storage = a.storage == "f32" ? model::StorageType::f32 : model::StorageType::f64;
  model::generate_toy_model(a.config, a.seed, a.out, words, storage);
  std::cerr << "wrote toy model to " << a.out << "\n";
}

// --- synth-records ---------------------------------------------------------

struct SynthArgs {
  fs::path model;
  std::size_t n = 300;
  std::uint64_t seed = 0;
  double positive_fraction = 0.5;
  fs::path out;
};

void run_synth(const SynthArgs& a) {
  const auto bundle = model::load_model(a.model);
  const auto records = pipeline::synthetic_records(bundle.vocab(), a.n, a.seed, a.positive_fraction);
  auto out = open_out(a.out);
  for (const auto& r : records) pipeline::write_record(out, r);
}

// --- attribute -------------------------------------------------------------

struct AttributeArgs {
  fs::path model;
  fs::path input;
  bool text_input = false;
  std::string template_span = "query";
  std::size_t jobs = 1;
  fs::path out;
};

void run_attribute(const AttributeArgs& a) {
  const auto bundle = model::load_model(a.model);
  auto in = open_in(a.input);
  const auto records = a.text_input ? pipeline::read_text_records(in, bundle.vocab()) : pipeline::read_records(in);
  const auto route = pipeline::parse_template_route(a.template_span);
  const auto results = pipeline::analyze_records(bundle, records, route, a.jobs);
  auto out = open_out(a.out);
  double worst = 0.0;
  std::size_t tokens = 0;
  for (const auto& r : results) {
    pipeline::write_attributions(out, r);
    worst = std::max(worst, r.max_residual());
    tokens += r.tokens.size();
  }
  std::cerr << "attributed " << tokens << " tokens in " << results.size() << " records, max residual " << worst
            << "\n";
}

// --- features --------------------------------------------------------------

struct FeaturesArgs {
  fs::path attributions;
  fs::path tags;
  bool fallback_tagger = false;
  double plant_signal = 0.0;
  fs::path out;
};

void run_features(const FeaturesArgs& a) {
  if (a.tags.empty() == !a.fallback_tagger) throw ConfigError("give exactly one of --tags or --fallback-tagger");
  auto in = open_in(a.attributions);
  auto responses = pipeline::read_attributions(in);
  syntax::WordsById sidecar;
  if (!a.tags.empty()) {
    auto tin = open_in(a.tags);
    sidecar = syntax::read_pos_sidecar(tin);
  }
  auto words_for = [&](const pipeline::AttributedResponse& r) {
    if (a.fallback_tagger) return syntax::builtin_fallback_tagger(r.response_text);
    auto it = sidecar.find(r.id);
    if (it == sidecar.end()) throw DataError("no POS words for record '" + r.id + "' in " + a.tags.string());
    return it->second;
  };

  std::vector<std::vector<syntax::TaggedWord>> words;
  for (const auto& r : responses) words.push_back(words_for(r));
  if (a.plant_signal != 0.0) {
    std::vector<std::vector<syntax::UposTag>> tags;
    for (std::size_t i = 0; i < responses.size(); ++i) {
      tags.push_back(pipeline::extract_features(responses[i], words[i]).token_tags);
    }
    pipeline::plant_signal(responses, tags, a.plant_signal);
  }
  std::vector<pipeline::ResponseFeatures> rows;
  for (std::size_t i = 0; i < responses.size(); ++i) rows.push_back(pipeline::extract_features(responses[i], words[i]));
  auto out = open_out(a.out);
  pipeline::write_features_csv(out, rows);
}

// --- train / evaluate ------------------------------------------------------

struct DetectorArgs {
  fs::path features;
  fs::path test_features;
  fs::path grid;
  fs::path config;
  std::string protocol = "kfold";
  std::size_t folds = 20;
  std::size_t search_iters = 50;
  std::size_t search_folds = 5;
  bool no_search = false;
  bool tune_threshold = false;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  fs::path out;
};

detector::Dataset load_features(const fs::path& path) {
  auto in = open_in(path);
  return pipeline::read_features_csv(in);
}

detector::DetectorConfig base_config(const DetectorArgs& a) {
  if (a.config.empty()) return {};
  auto in = open_in(a.config);
  try {
    return detector::config_from_json(detector::Json::parse(in));
  } catch (const detector::Json::parse_error& e) {
    throw ConfigError(a.config.string() + ": " + e.what());
  }
}

detector::SearchGrid grid(const DetectorArgs& a) {
  return a.grid.empty() ? detector::SearchGrid::default_grid() : detector::load_grid(a.grid);
}

void run_train(const DetectorArgs& a) {
  const auto data = load_features(a.features);
  detector::DetectorConfig config = base_config(a);
  if (!a.no_search) {
    const auto search =
        detector::random_search(data, grid(a), config, a.search_iters, a.search_folds, detector::derive_seed(a.seed, 0));
    config = search.best;
    std::cerr << "search: best CV F1 " << search.best_score << " over " << search.trials.size() << " trials\n";
  }
  config.seed = a.seed;
  const auto [fit_idx, val_idx] = detector::stratified_split(data.y, 0.15, detector::derive_seed(a.seed, 1));
  const auto fit_set = data.subset(fit_idx);
  const auto val_set = data.subset(val_idx);
  auto model = detector::fit(fit_set, val_set.size() ? &val_set : nullptr, config);
  if (a.tune_threshold && val_set.positives() > 0 && val_set.negatives() > 0) {
    model.threshold = detector::tune_threshold(detector::predict_all(model, val_set), val_set.y);
  }
  model.provenance.protocol = "train";
  detector::save_detector(model, a.out);
  std::cerr << "wrote detector with " << model.trees.size() << " trees to " << a.out << "\n";
}

void run_evaluate(const DetectorArgs& a) {
  const auto data = load_features(a.features);
  detector::ProtocolOptions options;
  options.grid = grid(a);
  options.base = base_config(a);
  options.search_iters = a.search_iters;
  options.search_folds = a.search_folds;
  options.seed = a.seed;
  options.tune_threshold = a.tune_threshold;
  options.jobs = a.jobs;

  detector::EvalReport report;
  if (a.protocol == "split") {
    if (a.test_features.empty()) throw ConfigError("protocol 'split' needs --test-features");
    report = detector::protocol_standard(data, load_features(a.test_features), options);
  } else if (a.protocol == "kfold") {
    report = detector::protocol_stratified_kfold(data, a.folds, options);
  } else if (a.protocol == "loocv") {
    report = detector::protocol_nested_loocv(data, options);
  } else {
    throw ConfigError("protocol must be split, kfold or loocv");
  }
  std::cout << detector::format_report(report);
  if (!a.out.empty()) {
    auto out = open_out(a.out);
    out << detector::report_to_json(report).dump(1) << '\n';
  }
}

void run_report(const fs::path& model_path) {
  const auto model = detector::load_detector(model_path);
  std::cout << detector::format_provenance(model) << "\n" << detector::format_importance(model);
}

void add_detector_flags(CLI::App* cmd, DetectorArgs& a) {
  cmd->add_option("--features", a.features, "feature CSV")->required()->check(CLI::ExistingFile);
  cmd->add_option("--grid", a.grid, "search grid JSON (default grid when omitted)")->check(CLI::ExistingFile);
  cmd->add_option("--config", a.config, "base detector config JSON")->check(CLI::ExistingFile);
  cmd->add_option("--search-iters", a.search_iters, "randomized search draws")->capture_default_str();
  cmd->add_option("--search-folds", a.search_folds, "inner CV folds")->capture_default_str();
  cmd->add_option("--seed", a.seed)->capture_default_str();
  cmd->add_flag("--tune-threshold", a.tune_threshold, "pick the threshold on the early-stopping slice");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Token probability attribution and hallucination detection"};
  app.require_subcommand(1);

  GenToyArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-toy", "generate a seeded toy model");
  gen_cmd->add_option("--layers", gen.config.n_layers)->capture_default_str();
  gen_cmd->add_option("--heads", gen.config.n_heads)->capture_default_str();
  gen_cmd->add_option("--dim", gen.config.d_model)->capture_default_str();
  gen_cmd->add_option("--vocab", gen.config.vocab_size)->capture_default_str();
  gen_cmd->add_option("--max-positions", gen.config.max_positions)->capture_default_str();
  gen_cmd->add_option("--ffn-dim", gen.config.d_ff, "0 means 4 * dim")->capture_default_str();
  gen_cmd->add_option("--norm", gen.norm, "layernorm | rmsnorm")->capture_default_str();
  gen_cmd->add_option("--positions", gen.positions, "learned_absolute | rotary | none")->capture_default_str();
  gen_cmd->add_option("--ffn", gen.ffn, "gelu | gated_silu")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed)->capture_default_str();
  gen_cmd->add_option("--words", gen.words, "file with one vocabulary word per line")->check(CLI::ExistingFile);
  gen_cmd->add_flag("--synthetic-words", gen.synthetic_words, "start the vocabulary with the synthetic word list");
  gen_cmd->add_option("--storage", gen.storage, "f32 | f64")->capture_default_str();
  gen_cmd->add_option("--out", gen.out)->required();

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth-records", "write a synthetic labeled record set");
  synth_cmd->add_option("--model", synth.model)->envname("TOKATTR_MODEL")->required();
  synth_cmd->add_option("-n,--count", synth.n)->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed)->capture_default_str();
  synth_cmd->add_option("--positive-fraction", synth.positive_fraction)->capture_default_str();
  synth_cmd->add_option("--out", synth.out)->required();

  AttributeArgs attr;
  auto* attr_cmd = app.add_subcommand("attribute", "per-token 7-source attribution");
  attr_cmd->add_option("--model", attr.model)->envname("TOKATTR_MODEL")->required();
  attr_cmd->add_option("--input", attr.input, "records JSONL")->required()->check(CLI::ExistingFile);
  attr_cmd->add_flag("--text-input", attr.text_input, "records hold whitespace text instead of token ids");
  attr_cmd->add_option("--template-span", attr.template_span, "query | rag")->capture_default_str();
  attr_cmd->add_option("--jobs", attr.jobs)->capture_default_str();
  attr_cmd->add_option("--out", attr.out)->required();

  FeaturesArgs feat;
  auto* feat_cmd = app.add_subcommand("features", "aggregate attributions into POS features");
  feat_cmd->add_option("--attributions", feat.attributions)->required()->check(CLI::ExistingFile);
  feat_cmd->add_option("--tags", feat.tags, "POS sidecar JSONL")->check(CLI::ExistingFile);
  feat_cmd->add_flag("--fallback-tagger", feat.fallback_tagger, "tag with the built-in rule tagger");
  feat_cmd->add_option("--plant-signal", feat.plant_signal,
                       "synthetic benchmarks only: shift RAG/LN mass of label-1 responses by this many deviations");
  feat_cmd->add_option("--out", feat.out)->required();

  DetectorArgs train;
  auto* train_cmd = app.add_subcommand("train", "fit a detector on a feature CSV");
  add_detector_flags(train_cmd, train);
  train_cmd->add_flag("--no-search", train.no_search, "fit the base config directly");
  train_cmd->add_option("--out", train.out)->required();

  DetectorArgs eval;
  auto* eval_cmd = app.add_subcommand("evaluate", "run an evaluation protocol");
  add_detector_flags(eval_cmd, eval);
  eval_cmd->add_option("--protocol", eval.protocol, "split | kfold | loocv")->capture_default_str();
  eval_cmd->add_option("--test-features", eval.test_features, "held-out CSV for split")->check(CLI::ExistingFile);
  eval_cmd->add_option("--folds", eval.folds, "k for kfold")->capture_default_str();
  eval_cmd->add_option("--jobs", eval.jobs)->capture_default_str();
  eval_cmd->add_option("--out", eval.out, "report JSON");

  fs::path report_model;
  auto* report_cmd = app.add_subcommand("report", "feature importance and provenance of a detector");
  report_cmd->add_option("--model", report_model, "detector JSON")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen_cmd) run_gen_toy(gen);
    if (*synth_cmd) run_synth(synth);
    if (*attr_cmd) run_attribute(attr);
    if (*feat_cmd) run_features(feat);
    if (*train_cmd) run_train(train);
    if (*eval_cmd) run_evaluate(eval);
    if (*report_cmd) run_report(report_model);
  } catch (const std::exception& e) {
    nlohmann::json err = {{"error", error_kind(e)}, {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 1;
  }
  return 0;
}
