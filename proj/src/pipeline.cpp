#include "kgtc/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include <fmt/core.h>
#include <nlohmann/json.hpp>

#include "kgtc/als.hpp"
#include "kgtc/checkpoint.hpp"
#include "kgtc/error.hpp"
#include "kgtc/io.hpp"
#include "kgtc/log.hpp"
#include "kgtc/sampling.hpp"
#include "kgtc/sgd.hpp"

namespace kgtc {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

const char* kSplitFiles[] = {"train.tsv",          "validation.tsv",          "holdout.tsv",
                             "probe.tsv",          "validation_negatives.tsv", "holdout_negatives.tsv",
                             "probe_negatives.tsv"};

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError(fmt::format("bad value '{}' for '{}'", value, key));
  }
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("bad value '{}' for '{}'", value, key));
  }
}

std::string stage_name(Stage s) { return s == Stage::tune ? "tune" : "final"; }

Provenance eval_negative_regime(const RunConfig& config) {
  if (config.eval_negatives == "auto") {
    return config.has_schema_inputs() ? Provenance::schema : Provenance::lcwa;
  }
  const Provenance p = provenance_from_string(config.eval_negatives);
  if (p == Provenance::schema && !config.has_schema_inputs()) {
    throw ConfigError("eval_negatives=schema needs --types and --constraints");
  }
  return p;
}

std::string semantics_file(Provenance p) { return fmt::format("semantics_{}.tsv", to_string(p)); }

std::string input_checksum(const fs::path& path) { return path.empty() ? "" : io::file_checksum(path); }

}  // namespace

void RunConfig::validate() const {
  hp.validate();
  if (triples.empty()) throw ConfigError("no triples file given");
  if (regime == Provenance::schema && !has_schema_inputs()) {
    throw ConfigError("the schema regime needs --types and --constraints");
  }
  if (types.empty() != constraints.empty()) {
    throw ConfigError("--types and --constraints must be given together");
  }
}

fs::path RunConfig::run_dir() const {
  const std::string name = fmt::format("{}_{}_d{}", to_string(model), to_string(regime), hp.dim);
  return out / (tag.empty() ? name : name + "_" + tag);
}

std::string RunConfig::to_key_values() const {
  std::map<std::string, std::string> kv;
  kv["model"] = std::string(to_string(model));
  kv["regime"] = std::string(to_string(regime));
  kv["triples"] = triples.string();
  kv["types"] = types.string();
  kv["constraints"] = constraints.string();
  kv["out"] = out.string();
  kv["dataset"] = dataset;
  kv["eval_negatives"] = eval_negatives;
  kv["stage"] = stage_name(stage);
  kv["dim"] = std::to_string(hp.dim);
  kv["lambda_a"] = fmt::format("{}", hp.lambda_a);
  kv["lambda_r"] = fmt::format("{}", hp.lambda_r);
  kv["gamma"] = fmt::format("{}", hp.gamma);
  kv["distance"] = std::string(to_string(hp.distance));
  kv["corruptions"] = std::to_string(hp.corruptions);
  kv["hidden"] = std::to_string(hp.hidden);
  kv["l1"] = fmt::format("{}", hp.l1);
  kv["l2"] = fmt::format("{}", hp.l2);
  kv["dropconnect"] = fmt::format("{}", hp.dropconnect);
  kv["lr"] = fmt::format("{}", hp.learning_rate);
  kv["batch"] = std::to_string(hp.batch_size);
  kv["adagrad_epsilon"] = fmt::format("{}", hp.adagrad_epsilon);
  kv["epochs"] = std::to_string(hp.max_epochs);
  kv["patience"] = std::to_string(hp.patience);
  kv["sgd_patience"] = std::to_string(hp.sgd_patience);
  kv["tolerance"] = fmt::format("{}", hp.tolerance);
  kv["init_std"] = fmt::format("{}", hp.init_std);
  kv["seed"] = std::to_string(hp.seed);
  std::string text;
  for (const auto& [k, v] : kv) text += fmt::format("{} = {}\n", k, v);
  return text;
}

std::string RunConfig::hash() const {
  // Neither the output location nor the report label influences results.
  RunConfig copy = *this;
  copy.out.clear();
  copy.dataset.clear();
  return io::fnv1a_hex(copy.to_key_values());
}

void set_config_value(RunConfig& c, const std::string& key, const std::string& value) {
  auto& hp = c.hp;
  if (key == "model") c.model = model_kind_from_string(value);
  else if (key == "regime") c.regime = provenance_from_string(value);
  else if (key == "triples") c.triples = value;
  else if (key == "types") c.types = value;
  else if (key == "constraints") c.constraints = value;
  else if (key == "out") c.out = value;
  else if (key == "dataset") c.dataset = value;
  else if (key == "eval_negatives") c.eval_negatives = value;
  else if (key == "stage") {
    if (value != "tune" && value != "final") throw ConfigError(fmt::format("unknown stage '{}'", value));
    c.stage = value == "tune" ? Stage::tune : Stage::final;
  }
  else if (key == "dim") hp.dim = parse_number<std::size_t>(key, value);
  else if (key == "lambda_a" || key == "lambda-a") hp.lambda_a = parse_double(key, value);
  else if (key == "lambda_r" || key == "lambda-r") hp.lambda_r = parse_double(key, value);
  else if (key == "gamma") hp.gamma = parse_double(key, value);
  else if (key == "distance") hp.distance = distance_from_string(value);
  else if (key == "corruptions") hp.corruptions = parse_number<std::size_t>(key, value);
  else if (key == "hidden") hp.hidden = parse_number<std::size_t>(key, value);
  else if (key == "l1") hp.l1 = parse_double(key, value);
  else if (key == "l2") hp.l2 = parse_double(key, value);
  else if (key == "dropconnect") hp.dropconnect = parse_double(key, value);
  else if (key == "lr") hp.learning_rate = parse_double(key, value);
  else if (key == "batch") hp.batch_size = parse_number<std::size_t>(key, value);
  else if (key == "adagrad_epsilon") hp.adagrad_epsilon = parse_double(key, value);
  else if (key == "epochs") hp.max_epochs = parse_number<std::size_t>(key, value);
  else if (key == "patience") hp.patience = parse_number<std::size_t>(key, value);
  else if (key == "sgd_patience") hp.sgd_patience = parse_number<std::size_t>(key, value);
  else if (key == "tolerance") hp.tolerance = parse_double(key, value);
  else if (key == "init_std" || key == "init-std") hp.init_std = parse_double(key, value);
  else if (key == "seed") hp.seed = parse_number<std::uint64_t>(key, value);
  else throw ConfigError(fmt::format("unknown config key '{}'", key));
}

RunConfig parse_key_values(const std::string& text, RunConfig base) {
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("config line {}: expected key = value", number));
    set_config_value(base, trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
  }
  return base;
}

RunConfig read_config_file(const fs::path& path, RunConfig base) {
  return parse_key_values(io::read_text(path), std::move(base));
}

Prepared cmd_prepare(const RunConfig& config) {
  config.validate();
  const auto records = io::read_triples_file(config.triples);
  LoadedGraph graph = load_graph(records);
  Prepared prep{std::move(graph.vocab), std::move(graph.store), {}, {}};
  const std::size_t n = prep.vocab.num_entities();
  const std::size_t m = prep.vocab.num_relations();

  prep.split = partition_positives(prep.store, config.hp.seed);
  const TripleStore train = store_of(prep.split.train, n, m);
  prep.semantics.emplace(Provenance::unconstrained, RelationSemantics::unconstrained(n, m));
  prep.semantics.emplace(Provenance::lcwa, lcwa_semantics(train));
  if (config.has_schema_inputs()) {
    const auto types = io::read_types_file(config.types, prep.vocab);
    const auto decls = io::read_constraints_file(config.constraints, prep.vocab);
    prep.semantics.emplace(Provenance::schema,
                           resolve_schema_constraints(prep.vocab, prep.store, types, decls));
  }
  const Provenance negatives_regime = eval_negative_regime(config);
  attach_negatives(prep.split, prep.store, prep.semantics.at(negatives_regime));

  const fs::path dir = config.prepared_dir();
  fs::create_directories(dir);
  io::write_vocabulary(dir, prep.vocab);
  const std::vector<Triple>* parts[] = {&prep.split.train,           &prep.split.validation,
                                        &prep.split.holdout,         &prep.split.early_stop_probe,
                                        &prep.split.validation_negatives, &prep.split.holdout_negatives,
                                        &prep.split.probe_negatives};
  for (std::size_t i = 0; i < std::size(kSplitFiles); ++i) {
    io::write_triples_file(dir / kSplitFiles[i], *parts[i], prep.vocab);
  }
  for (const auto& [regime, sem] : prep.semantics) io::write_semantics(dir / semantics_file(regime), sem);

  Json manifest;
  manifest["seed"] = config.hp.seed;
  manifest["dataset"] = config.dataset;
  manifest["eval_negatives"] = std::string(to_string(negatives_regime));
  manifest["negative_shortfall"] = prep.split.negative_shortfall;
  manifest["inputs"] = {{"triples", input_checksum(config.triples)},
                        {"types", input_checksum(config.types)},
                        {"constraints", input_checksum(config.constraints)}};
  Json files;
  std::vector<std::string> names = {"entities.tsv", "relations.tsv"};
  names.insert(names.end(), std::begin(kSplitFiles), std::end(kSplitFiles));
  for (const auto& [regime, sem] : prep.semantics) names.push_back(semantics_file(regime));
  for (const auto& name : names) files[name] = io::file_checksum(dir / name);
  manifest["files"] = files;
  io::write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  log::info("prepared {} triples ({} train, {} validation, {} holdout) in {}", prep.store.size(),
            prep.split.train.size(), prep.split.validation.size(), prep.split.holdout.size(), dir.string());
  return prep;
}

Prepared load_prepared(const RunConfig& config) {
  const fs::path dir = config.prepared_dir();
  if (!fs::exists(dir / "manifest.json")) {
    throw StaleArtifactError(fmt::format("no prepared artifacts in '{}'; run prepare first", dir.string()));
  }
  const auto manifest = nlohmann::json::parse(io::read_text(dir / "manifest.json"));
  for (const auto& [name, checksum] : manifest.at("files").items()) {
    if (!fs::exists(dir / name) || io::file_checksum(dir / name) != checksum.get<std::string>()) {
      throw StaleArtifactError(fmt::format("prepared file '{}' does not match its manifest checksum", name));
    }
  }
  if (manifest.at("seed").get<std::uint64_t>() != config.hp.seed) {
    throw StaleArtifactError("prepared split was made with a different seed");
  }
  const auto& inputs = manifest.at("inputs");
  if (inputs.at("triples").get<std::string>() != input_checksum(config.triples) ||
      inputs.at("types").get<std::string>() != input_checksum(config.types) ||
      inputs.at("constraints").get<std::string>() != input_checksum(config.constraints)) {
    throw StaleArtifactError("input files changed since prepare");
  }

  Prepared prep;
  prep.vocab = io::read_vocabulary(dir);
  const std::size_t n = prep.vocab.num_entities();
  const std::size_t m = prep.vocab.num_relations();
  std::vector<Triple>* parts[] = {&prep.split.train,           &prep.split.validation,
                                  &prep.split.holdout,         &prep.split.early_stop_probe,
                                  &prep.split.validation_negatives, &prep.split.holdout_negatives,
                                  &prep.split.probe_negatives};
  for (std::size_t i = 0; i < std::size(kSplitFiles); ++i) {
    *parts[i] = io::read_id_triples(dir / kSplitFiles[i], prep.vocab);
  }
  prep.split.split_seed = config.hp.seed;
  prep.split.negative_shortfall = manifest.at("negative_shortfall").get<std::size_t>();
  prep.store = TripleStore(n, m);
  for (const auto* part : {&prep.split.train, &prep.split.validation, &prep.split.holdout}) {
    for (const Triple& t : *part) prep.store.insert(t);
  }
  for (Provenance p : {Provenance::unconstrained, Provenance::schema, Provenance::lcwa}) {
    const fs::path file = dir / semantics_file(p);
    if (fs::exists(file)) prep.semantics.emplace(p, io::read_semantics(file, n));
  }
  return prep;
}

FitResult cmd_train(const RunConfig& config) {
  config.validate();
  const Prepared prep = load_prepared(config);
  auto sem = prep.semantics.find(config.regime);
  if (sem == prep.semantics.end()) {
    throw ConfigError(fmt::format("no prepared semantics for regime '{}'", to_string(config.regime)));
  }
  std::vector<Triple> fit_triples = prep.split.train;
  if (config.stage == Stage::final) {
    fit_triples.insert(fit_triples.end(), prep.split.validation.begin(), prep.split.validation.end());
  }
  const TripleStore train = store_of(fit_triples, prep.vocab.num_entities(), prep.vocab.num_relations());
  const RelationSemantics semantics =
      config.regime == Provenance::lcwa && config.stage == Stage::final ? lcwa_semantics(train) : sem->second;

  FitResult result = config.model == ModelKind::rescal
                         ? fit_rescal(train, semantics, prep.split, config.hp)
                         : fit_sgd(config.model, train, semantics, prep.split, config.hp);

  const fs::path dir = config.run_dir();
  fs::create_directories(dir);
  save_checkpoint(dir / "model.ckpt", result.params,
                  {config.hp, std::string(to_string(config.regime)), config.hash()});
  io::write_text(dir / "train_log.csv", training_log_csv(result.log));
  io::write_text(dir / "config.txt", config.to_key_values());
  return result;
}

EvalReport cmd_evaluate(const RunConfig& config) {
  config.validate();
  const Prepared prep = load_prepared(config);
  const Checkpoint ckpt = load_checkpoint(config.run_dir() / "model.ckpt");
  if (kind_of(ckpt.params) != config.model) {
    throw ConfigError(fmt::format("checkpoint holds a {} model, config asks for {}",
                                  to_string(kind_of(ckpt.params)), to_string(config.model)));
  }
  if (ckpt.meta.config_hash != config.hash()) {
    throw StaleArtifactError("checkpoint was trained under a different configuration");
  }
  const SplitPart part = config.stage == Stage::final ? SplitPart::holdout : SplitPart::validation;
  EvalReport report = evaluate(ckpt.params, prep.split, part, config.regime, config.hp.seed);

  io::write_text(config.run_dir() / "report.json", to_json(report) + "\n");
  const fs::path table = config.out / (config.stage == Stage::final ? "results.csv" : "tuning_results.csv");
  if (!fs::exists(table)) io::write_text(table, comparison_csv_header() + "\n");
  io::append_text(table, comparison_csv_row(report, config.dataset) + "\n");
  return report;
}

namespace {

// Picks the candidate with the best validation AUPRC (first one on ties) and
// writes it into `cell.hp`.
void tune_cell(RunConfig& cell, const GridConfig& grid, std::vector<TuningRecord>& records) {
  const bool rescal = cell.model == ModelKind::rescal;
  const auto& candidates = rescal ? grid.rescal_lambdas : grid.learning_rates;
  if (candidates.empty()) return;
  auto apply = [rescal](Hyperparams& hp, double v) {
    if (rescal) {
      hp.lambda_a = v;
      hp.lambda_r = v;
    } else {
      hp.learning_rate = v;
    }
  };
  double best_value = candidates.front();
  double best_auprc = -1.0;
  for (double v : candidates) {
    RunConfig trial = cell;
    trial.stage = Stage::tune;
    trial.hp.max_epochs = std::min(cell.hp.max_epochs, grid.tune_epochs);
    trial.tag = fmt::format("tune_{}", v);
    apply(trial.hp, v);
    cmd_train(trial);
    const double auprc = cmd_evaluate(trial).auprc;
    records.push_back({cell.model, cell.regime, cell.hp.dim, rescal ? "lambda" : "learning_rate", v, auprc});
    if (auprc > best_auprc) {
      best_auprc = auprc;
      best_value = v;
    }
  }
  apply(cell.hp, best_value);
}

}  // namespace

GridResult cmd_grid(const GridConfig& grid) {
  if (grid.models.empty() || grid.regimes.empty() || grid.dims.empty()) {
    throw ConfigError("grid needs at least one model, regime and dimension");
  }
  RunConfig prepare_config = grid.base;
  prepare_config.regime = Provenance::unconstrained;
  cmd_prepare(prepare_config);

  GridResult result;
  for (std::size_t dim : grid.dims) {
    for (ModelKind model : grid.models) {
      for (Provenance regime : grid.regimes) {
        RunConfig cell = grid.base;
        cell.model = model;
        cell.regime = regime;
        cell.stage = Stage::final;
        cell.hp.dim = dim;
        const std::string name = fmt::format("{}/{}/d={}", to_string(model), to_string(regime), dim);
        try {
          tune_cell(cell, grid, result.tuning);
          cmd_train(cell);
          result.reports.push_back(cmd_evaluate(cell));
          log::info("grid cell {}: auprc {:.4f} auroc {:.4f}", name, result.reports.back().auprc,
                    result.reports.back().auroc);
        } catch (const std::exception& e) {
          result.failures.push_back(fmt::format("{}: {}", name, e.what()));
          log::error("grid cell {} failed: {}", name, e.what());
        }
      }
    }
  }

  std::string tuning = "model,regime,d,parameter,value,validation_auprc\n";
  for (const auto& t : result.tuning) {
    tuning += fmt::format("{},{},{},{},{},{:.12g}\n", to_string(t.model), to_string(t.regime), t.dim, t.parameter,
                          t.value, t.validation_auprc);
  }
  io::write_text(grid.base.out / "tuning.csv", tuning);

  std::string table = comparison_csv_header() + "\n";
  for (const auto& r : result.reports) table += comparison_csv_row(r, grid.base.dataset) + "\n";
  result.table = grid.base.out / "grid_results.csv";
  io::write_text(result.table, table);
  if (!result.failures.empty()) {
    std::string text;
    for (const auto& f : result.failures) text += f + "\n";
    io::write_text(grid.base.out / "grid_failures.txt", text);
  }
  return result;
}

SyntheticGraph cmd_synth(const SyntheticSpec& spec, const fs::path& dir) {
  SyntheticGraph graph = generate_synthetic(spec);
  write_synthetic(graph, dir);
  return graph;
}

}  // namespace kgtc
