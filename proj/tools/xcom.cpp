// Command-line driver: data generation, training, prediction, evaluation,
// attribution, faithfulness curves and ablations.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "xcom/xcom.hpp"

namespace fs = std::filesystem;

namespace {

#ifndef XCOM_DEFAULT_CONFIG
#define XCOM_DEFAULT_CONFIG "data/xcom.ini"
#endif

struct Globals {
  std::string config = XCOM_DEFAULT_CONFIG;
  std::uint64_t seed = 1;
  std::string out = "out";
  bool quiet = false;
};

void WriteFile(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw xcom::Error(xcom::ErrorCode::kIo, "cannot write " + path.string());
  out << content;
}

void Log(const Globals& g, const std::string& msg) {
  if (!g.quiet) std::cerr << msg << '\n';
}

xcom::Config LoadConfig(const Globals& g) { return xcom::Config::Load(g.config); }

xcom::NullPolicy PolicyFrom(const xcom::Config& cfg, const std::string& override_name) {
  return xcom::ParseNullPolicy(
      override_name.empty() ? cfg.GetString("eval.null_policy", "exclude-gold-null")
                            : override_name);
}

xcom::SplitRatios RatiosFrom(const xcom::Config& cfg) {
  xcom::SplitRatios r;
  r.train = cfg.Get<double>("split.train", r.train);
  r.dev = cfg.Get<double>("split.dev", r.dev);
  r.test = cfg.Get<double>("split.test", r.test);
  return r;
}

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void GenData(const Globals& g) {
  const auto cfg = LoadConfig(g);
  const auto gen = xcom::LoadGeneratorConfig(cfg);
  const auto corpus = xcom::GenerateSynthetic(gen, g.seed);
  const auto split = xcom::Split(corpus, RatiosFrom(cfg), g.seed);
  const fs::path out(g.out);
  fs::create_directories(out);
  xcom::SaveCorpus(corpus, out / "corpus.jsonl");
  xcom::SaveCorpus(split.train, out / "train.jsonl");
  xcom::SaveCorpus(split.dev, out / "dev.jsonl");
  xcom::SaveCorpus(split.test, out / "test.jsonl");
  nlohmann::ordered_json meta = {{"seed", g.seed},
                                 {"config_digest", corpus.meta.config_digest},
                                 {"pairs", corpus.size()},
                                 {"train", split.train.size()},
                                 {"dev", split.dev.size()},
                                 {"test", split.test.size()}};
  WriteFile(out / "meta.json", meta.dump(2) + "\n");
  Log(g, "wrote " + std::to_string(corpus.size()) + " pairs to " + out.string());
}

void Train(const Globals& g, const std::string& data, bool oracle) {
  const auto cfg = LoadConfig(g);
  auto pc = xcom::LoadPipelineConfig(cfg, g.seed);
  if (oracle) pc.options.routing = xcom::RoutingMode::kOracle;
  const auto corpus = xcom::LoadCorpus(data);
  xcom::TrainLog log;
  const auto pipeline = xcom::Pipeline::Train(corpus, pc, &log);
  pipeline.Save(g.out);
  WriteFile(fs::path(g.out) / "train_log.json", log.ToJson().dump(2) + "\n");
  Log(g, "trained on " + std::to_string(corpus.size()) + " pairs; model in " + g.out);
}

void Predict(const Globals& g, const std::string& model, const std::string& data,
             bool oracle) {
  const auto pipeline = xcom::Pipeline::Load(model);
  const auto corpus = xcom::LoadCorpus(data);
  std::string out;
  for (const auto& pair : corpus.pairs) {
    const auto pp = pipeline.Predict(
        pair, oracle ? std::optional(xcom::RoutingMode::kOracle) : std::nullopt);
    nlohmann::ordered_json j;
    j["user_id"] = pair.user_id();
    j["first"] = pair.first.review_id;
    j["second"] = pair.second.review_id;
    j["predictions"] = nlohmann::ordered_json::array();
    for (auto a : xcom::kAllAspects) {
      j["predictions"].push_back(xcom::PredictionToJson(a, pp.predictions[xcom::Index(a)]));
    }
    out += j.dump() + "\n";
  }
  WriteFile(fs::path(g.out) / "predictions.jsonl", out);
}

void Eval(const Globals& g, const std::string& model, const std::string& data, bool oracle,
          const std::string& policy_name) {
  const auto cfg = LoadConfig(g);
  const auto policy = PolicyFrom(cfg, policy_name);
  const auto pipeline = xcom::Pipeline::Load(model);
  const auto corpus = xcom::LoadCorpus(data);
  const auto ev = xcom::Evaluate(
      pipeline, corpus, policy,
      oracle ? std::optional(xcom::RoutingMode::kOracle) : std::nullopt);
  const fs::path out(g.out);
  WriteFile(out / "metrics.json", xcom::EvaluationToJson(ev).dump(2) + "\n");
  const std::string table = xcom::EvaluationTable(ev);
  WriteFile(out / "table.txt", table);
  WriteFile(out / "predictions.jsonl", xcom::PredictionsJsonl(corpus, ev));
  if (!g.quiet) std::cout << table;
}

void ExplainCmd(const Globals& g, const std::string& model, const std::string& data,
                std::size_t pair_index, const std::string& aspect_name) {
  const auto cfg = LoadConfig(g);
  const auto ec = xcom::LoadExplainConfig(cfg, g.seed);
  const auto pipeline = xcom::Pipeline::Load(model);
  const auto corpus = xcom::LoadCorpus(data);
  if (pair_index >= corpus.size()) {
    throw xcom::Error(xcom::ErrorCode::kInvalidConfig,
                      "pair index " + std::to_string(pair_index) + " out of range");
  }
  std::vector<xcom::Aspect> aspects(xcom::kAllAspects.begin(), xcom::kAllAspects.end());
  if (!aspect_name.empty()) {
    const auto a = xcom::ParseAspect(aspect_name);
    if (!a) throw xcom::Error(xcom::ErrorCode::kInvalidConfig, "unknown aspect " + aspect_name);
    aspects = {*a};
  }
  const auto sets = pipeline.Route(corpus.pairs[pair_index]);
  const fs::path out(g.out);
  std::size_t written = 0;
  for (auto a : aspects) {
    const std::string stem =
        "attribution_" + std::to_string(pair_index) + "_" + std::string(xcom::AspectName(a));
    if (xcom::NullGate(sets, a) == xcom::GateDecision::kNull) {
      Log(g, stem + ": Null (aspect missing on one side), skipped");
      continue;
    }
    const auto attr = xcom::Explain(pipeline, sets.at(a), ec);
    WriteFile(out / (stem + ".json"), xcom::AttributionToJson(attr).dump(2) + "\n");
    WriteFile(out / (stem + ".svg"), xcom::AttributionToSvg(attr));
    ++written;
  }
  Log(g, "wrote " + std::to_string(written) + " attributions to " + out.string());
}

void Faithfulness(const Globals& g, const std::string& model, const std::string& data,
                  const std::string& ks_text) {
  const auto cfg = LoadConfig(g);
  const auto ec = xcom::LoadExplainConfig(cfg, g.seed);
  const auto policy = PolicyFrom(cfg, "");
  const auto pipeline = xcom::Pipeline::Load(model);
  const auto corpus = xcom::LoadCorpus(data);
  std::vector<std::size_t> ks;
  for (const auto& k : SplitList(ks_text)) {
    try {
      ks.push_back(std::stoul(k));
    } catch (const std::exception&) {
      throw xcom::Error(xcom::ErrorCode::kInvalidConfig, "bad k '" + k + "'");
    }
  }
  const auto ranked = xcom::RankAdjectives(pipeline, corpus, ec);
  const auto curves = xcom::FaithfulnessCurves(pipeline, ranked, ks, policy);
  const std::string csv = xcom::CurvesToCsv(curves);
  WriteFile(fs::path(g.out) / "faithfulness.csv", csv);
  if (!g.quiet) std::cout << csv;
}

void Ablate(const Globals& g, const std::string& data, const std::string& variants_text) {
  const auto cfg = LoadConfig(g);
  const auto pc = xcom::LoadPipelineConfig(cfg, g.seed);
  const auto policy = PolicyFrom(cfg, "");
  const auto corpus = xcom::LoadCorpus(data);
  const auto split = xcom::Split(corpus, RatiosFrom(cfg), g.seed);
  auto variants = SplitList(variants_text);
  if (variants.empty()) variants = xcom::KnownVariants();
  const auto rows = xcom::RunAblation(split.train, split.test, pc, variants, policy);
  const std::string csv = xcom::AblationToCsv(rows);
  WriteFile(fs::path(g.out) / "ablation.csv", csv);
  if (!g.quiet) std::cout << csv;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"xcom: per-aspect comparison of two reviews by the same user"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "INI configuration file");
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--out", g.out, "output directory");
  app.add_flag("--quiet", g.quiet, "suppress progress output");

  std::string data, model, null_policy, ks, variants, aspect;
  bool oracle = false;
  std::size_t pair_index = 0;

  auto* gen = app.add_subcommand("gen-data", "generate a synthetic corpus and its splits");
  auto* train = app.add_subcommand("train", "train a pipeline on a corpus");
  train->add_option("--data", data, "training corpus (JSONL)")->required();
  train->add_flag("--oracle-aspects", oracle, "route sentences by their annotations");
  auto* predict = app.add_subcommand("predict", "predict labels for a corpus");
  predict->add_option("--model", model, "model directory")->required();
  predict->add_option("--data", data, "corpus (JSONL)")->required();
  predict->add_flag("--oracle-aspects", oracle, "route sentences by their annotations");
  auto* eval = app.add_subcommand("eval", "score predictions against gold labels");
  eval->add_option("--model", model, "model directory")->required();
  eval->add_option("--data", data, "corpus (JSONL)")->required();
  eval->add_flag("--oracle-aspects", oracle, "route sentences by their annotations");
  eval->add_option("--null-policy", null_policy, "exclude-gold-null or null-as-fourth-class");
  auto* explain = app.add_subcommand("explain", "token attributions for one pair");
  explain->add_option("--model", model, "model directory")->required();
  explain->add_option("--data", data, "corpus (JSONL)")->required();
  explain->add_option("--pair", pair_index, "pair index in the corpus");
  explain->add_option("--aspect", aspect, "aspect name (default: all)");
  auto* faith = app.add_subcommand("faithfulness", "top-k / bottom-k adjective masking curves");
  faith->add_option("--model", model, "model directory")->required();
  faith->add_option("--data", data, "test corpus (JSONL)")->required();
  faith->add_option("--ks", ks, "comma-separated k values (default: 0..k_max)");
  auto* ablate = app.add_subcommand("ablate", "retrain and score model variants");
  ablate->add_option("--data", data, "full corpus (JSONL), split with --seed")->required();
  ablate->add_option("--variants", variants, "comma-separated variant names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) GenData(g);
    if (*train) Train(g, data, oracle);
    if (*predict) Predict(g, model, data, oracle);
    if (*eval) Eval(g, model, data, oracle, null_policy);
    if (*explain) ExplainCmd(g, model, data, pair_index, aspect);
    if (*faith) Faithfulness(g, model, data, ks);
    if (*ablate) Ablate(g, data, variants);
  } catch (const xcom::Error& e) {
    std::cerr << "error [" << xcom::ErrorCodeName(e.code()) << "]: " << e.what() << '\n';
    return xcom::IsValidationError(e.code()) ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
