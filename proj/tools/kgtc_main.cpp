// kgtc command-line driver: synth, prepare, train, evaluate, grid.

#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "kgtc/error.hpp"
#include "kgtc/io.hpp"
#include "kgtc/log.hpp"
#include "kgtc/pipeline.hpp"

namespace {

// Flag name (without dashes) -> config key. Values are applied after the
// optional --config file, so flags win.
const std::vector<std::pair<std::string, std::string>> kRunFlags = {
    {"model", "model"},       {"regime", "regime"},         {"dim", "dim"},
    {"triples", "triples"},   {"types", "types"},           {"constraints", "constraints"},
    {"out", "out"},           {"seed", "seed"},             {"epochs", "epochs"},
    {"lr", "lr"},             {"batch", "batch"},           {"gamma", "gamma"},
    {"lambda-a", "lambda_a"}, {"lambda-r", "lambda_r"},     {"corruptions", "corruptions"},
    {"dropconnect", "dropconnect"}, {"l1", "l1"},           {"l2", "l2"},
    {"init-std", "init_std"}, {"distance", "distance"},     {"hidden", "hidden"},
    {"patience", "patience"}, {"sgd-patience", "sgd_patience"}, {"tolerance", "tolerance"},
    {"stage", "stage"},
    {"dataset", "dataset"},   {"eval-negatives", "eval_negatives"},
};

struct RunFlags {
  std::string config_file;
  std::map<std::string, std::string> values;
};

void add_run_flags(CLI::App* cmd, RunFlags& flags) {
  cmd->add_option("--config", flags.config_file, "key = value run configuration file");
  for (const auto& [flag, key] : kRunFlags) {
    cmd->add_option("--" + flag, flags.values[flag], "sets '" + key + "'");
  }
}

kgtc::RunConfig build_config(CLI::App* cmd, const RunFlags& flags) {
  kgtc::RunConfig config;
  if (!flags.config_file.empty()) config = kgtc::read_config_file(flags.config_file);
  for (const auto& [flag, key] : kRunFlags) {
    if (cmd->count("--" + flag) > 0) kgtc::set_config_value(config, key, flags.values.at(flag));
  }
  return config;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto piece = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!piece.empty()) out.push_back(piece);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge-graph embeddings with relation type constraints"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "log progress to stderr");

  RunFlags prepare_flags, train_flags, evaluate_flags, grid_flags;
  auto* prepare = app.add_subcommand("prepare", "split triples and derive relation semantics");
  add_run_flags(prepare, prepare_flags);
  auto* train = app.add_subcommand("train", "train one model on prepared artifacts");
  add_run_flags(train, train_flags);
  auto* evaluate = app.add_subcommand("evaluate", "score a checkpoint against the evaluation split");
  add_run_flags(evaluate, evaluate_flags);

  auto* grid = app.add_subcommand("grid", "prepare once, then train and evaluate every cell");
  add_run_flags(grid, grid_flags);
  std::string grid_models = "rescal,transe,mwnn", grid_regimes = "none,schema,lcwa", grid_dims = "10";
  grid->add_option("--models", grid_models, "comma-separated models")->capture_default_str();
  grid->add_option("--regimes", grid_regimes, "comma-separated regimes")->capture_default_str();
  grid->add_option("--dims", grid_dims, "comma-separated embedding lengths")->capture_default_str();
  std::string tune_lambdas = "0,0.1,1", tune_lrs = "0.1,0.01,0.001";
  std::size_t tune_epochs = 50;
  grid->add_option("--tune-lambdas", tune_lambdas, "RESCAL ridge candidates; empty disables tuning")
      ->capture_default_str();
  grid->add_option("--tune-lrs", tune_lrs, "SGD learning-rate candidates; empty disables tuning")
      ->capture_default_str();
  grid->add_option("--tune-epochs", tune_epochs, "epoch cap for tuning runs")->capture_default_str();

  auto* synth = app.add_subcommand("synth", "write a synthetic typed knowledge graph");
  kgtc::SyntheticSpec spec;
  std::string synth_out = "synthetic";
  synth->add_option("--classes", spec.classes)->capture_default_str();
  synth->add_option("--entities-per-class", spec.entities_per_class)->capture_default_str();
  synth->add_option("--relations", spec.relations)->capture_default_str();
  synth->add_option("--triples-per-relation", spec.triples_per_relation)->capture_default_str();
  synth->add_option("--noise", spec.noise)->capture_default_str();
  synth->add_option("--clusters", spec.clusters_per_class, "clusters per class")->capture_default_str();
  synth->add_option("--preferred", spec.preferred_clusters, "object clusters linked per subject cluster")
      ->capture_default_str();
  synth->add_option("--seed", spec.seed)->capture_default_str();
  synth->add_option("--out", synth_out, "output directory")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  if (verbose) kgtc::log::set_min_level(kgtc::log::Level::info);

  try {
    if (*synth) {
      const auto graph = kgtc::cmd_synth(spec, synth_out);
      fmt::print("wrote {} triples to {}\n", graph.triples.size(), synth_out);
    } else if (*prepare) {
      const auto prep = kgtc::cmd_prepare(build_config(prepare, prepare_flags));
      fmt::print("train={} validation={} holdout={} probe={} holdout_negatives={}\n", prep.split.train.size(),
                 prep.split.validation.size(), prep.split.holdout.size(), prep.split.early_stop_probe.size(),
                 prep.split.holdout_negatives.size());
    } else if (*train) {
      const auto config = build_config(train, train_flags);
      const auto fit = kgtc::cmd_train(config);
      fmt::print("trained {} epochs (best {}), checkpoint in {}\n", fit.log.records.size() - 1,
                 fit.log.best_epoch, config.run_dir().string());
    } else if (*evaluate) {
      const auto report = kgtc::cmd_evaluate(build_config(evaluate, evaluate_flags));
      fmt::print("{}\n", kgtc::to_json(report));
    } else if (*grid) {
      kgtc::GridConfig gc;
      gc.base = build_config(grid, grid_flags);
      gc.models.clear();
      gc.regimes.clear();
      gc.dims.clear();
      for (const auto& m : split_list(grid_models)) gc.models.push_back(kgtc::model_kind_from_string(m));
      for (const auto& r : split_list(grid_regimes)) gc.regimes.push_back(kgtc::provenance_from_string(r));
      for (const auto& d : split_list(grid_dims)) gc.dims.push_back(std::stoul(d));
      gc.rescal_lambdas.clear();
      gc.learning_rates.clear();
      for (const auto& v : split_list(tune_lambdas)) gc.rescal_lambdas.push_back(std::stod(v));
      for (const auto& v : split_list(tune_lrs)) gc.learning_rates.push_back(std::stod(v));
      gc.tune_epochs = tune_epochs;
      const auto result = kgtc::cmd_grid(gc);
      std::fputs(kgtc::io::read_text(result.table).c_str(), stdout);
      return result.failures.empty() ? 0 : 3;
    }
  } catch (const kgtc::InputError& e) {
    fmt::print(stderr, "input error: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
