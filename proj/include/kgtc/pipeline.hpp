#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kgtc/graph.hpp"
#include "kgtc/metrics.hpp"
#include "kgtc/models.hpp"
#include "kgtc/synth.hpp"
#include "kgtc/training.hpp"

namespace kgtc {

enum class Stage {
  tune,   ///< fit on train, report on validation
  final,  ///< fit on train + validation, report on holdout
};

/// Everything a prepare/train/evaluate run needs. The experiment root `out`
/// holds `prepared/` plus one directory per (model, regime, dim) cell.
struct RunConfig {
  ModelKind model = ModelKind::rescal;
  Provenance regime = Provenance::unconstrained;
  std::filesystem::path triples;
  std::filesystem::path types;
  std::filesystem::path constraints;
  std::filesystem::path out = "kgtc_out";
  std::string dataset = "dataset";
  /// Semantics for evaluation negatives: "auto" picks schema when types and
  /// constraints are given, lcwa otherwise.
  std::string eval_negatives = "auto";
  Stage stage = Stage::final;
  Hyperparams hp;
  /// Suffix for run_dir(); lets tuning runs sit next to the final run.
  std::string tag;

  bool has_schema_inputs() const { return !types.empty() && !constraints.empty(); }
  /// Throws ConfigError, e.g. for a schema regime without type files.
  void validate() const;

  std::filesystem::path prepared_dir() const { return out / "prepared"; }
  std::filesystem::path run_dir() const;

  /// Flat `key = value` lines, sorted by key.
  std::string to_key_values() const;
  std::string hash() const;
};

/// Applies `key = value` lines ('#' comments allowed) on top of `base`.
RunConfig parse_key_values(const std::string& text, RunConfig base = {});
RunConfig read_config_file(const std::filesystem::path& path, RunConfig base = {});
/// Sets one key; throws ConfigError for unknown keys or bad values.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);

/// In-memory view of a prepared experiment.
struct Prepared {
  Vocabulary vocab;
  TripleStore store;  ///< all observed triples
  SplitBundle split;
  std::map<Provenance, RelationSemantics> semantics;
};

/// Loads the inputs, splits them, draws evaluation negatives and writes the
/// split, the vocabulary and the semantics of every regime the inputs allow
/// (none, lcwa, and schema when types and constraints are given) under
/// prepared_dir(), with a checksum manifest. The split is shared by all
/// regimes.
Prepared cmd_prepare(const RunConfig& config);

/// Reads prepared artifacts after verifying the manifest; throws
/// StaleArtifactError on checksum or seed mismatch.
Prepared load_prepared(const RunConfig& config);

/// Trains config.model under config.regime and writes model.ckpt and
/// train_log.csv into run_dir(). At the final stage lcwa sets are derived
/// from the fitted triples (train + validation).
FitResult cmd_train(const RunConfig& config);

/// Scores the checkpoint in run_dir(), writes report.json there and appends
/// a row to <out>/results.csv (tuning_results.csv at the tune stage).
EvalReport cmd_evaluate(const RunConfig& config);

struct GridConfig {
  RunConfig base;
  std::vector<ModelKind> models{ModelKind::rescal, ModelKind::transe, ModelKind::mwnn};
  std::vector<Provenance> regimes{Provenance::unconstrained, Provenance::schema, Provenance::lcwa};
  std::vector<std::size_t> dims{10};
  /// Candidates tried on the validation split before each final fit; an
  /// empty list keeps the base value. RESCAL tunes lambda_a = lambda_r, the
  /// SGD models tune the learning rate.
  std::vector<double> rescal_lambdas{0.0, 0.1, 1.0};
  std::vector<double> learning_rates{0.1, 0.01, 0.001};
  std::size_t tune_epochs = 50;
};

struct TuningRecord {
  ModelKind model;
  Provenance regime;
  std::size_t dim;
  std::string parameter;
  double value;
  double validation_auprc;
};

struct GridResult {
  std::vector<EvalReport> reports;
  std::vector<TuningRecord> tuning;
  std::vector<std::string> failures;
  std::filesystem::path table;
};

/// One shared split, then per cell: tune on validation, refit on
/// train + validation and evaluate on holdout. Failed cells are recorded and
/// skipped. Writes <out>/grid_results.csv and <out>/tuning.csv.
GridResult cmd_grid(const GridConfig& grid);

/// Writes triples.tsv, types.tsv and constraints.tsv into `dir`.
SyntheticGraph cmd_synth(const SyntheticSpec& spec, const std::filesystem::path& dir);

}  // namespace kgtc
