// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include <fmt/core.h>

#include "instances.hpp"
#include "kgtc/als.hpp"
#include "kgtc/io.hpp"
#include "kgtc/metrics.hpp"
#include "kgtc/pipeline.hpp"
#include "oracles.hpp"

using namespace kgtc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void run(const std::string& name, double budget_s, const std::function<Outcome()>& check) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = check();
  } catch (const std::exception& e) {
    out = {false, fmt::format("threw: {}", e.what())};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs > budget_s) {
    out.pass = false;
    out.detail += fmt::format("; over the {:.0f} s budget", budget_s);
  }
  failures += !out.pass;
  fmt::print("{} {} ({:.1f} s): {}\n", out.pass ? "PASS" : "FAIL", name, secs, out.detail);
  std::fflush(stdout);
}

fs::path scratch_dir() {
  std::random_device rd;
  auto dir = fs::temp_directory_path() / fmt::format("kgtc_acceptance_{:x}", rd());
  fs::create_directories(dir);
  return dir;
}

// In-memory view of a synthetic graph with schema semantics.
struct TypedGraph {
  LoadedGraph graph;
  RelationSemantics schema;
};

TypedGraph typed_graph(const SyntheticGraph& syn) {
  std::vector<TripleRecord> records;
  for (const auto& t : syn.triples) records.push_back({records.size() + 1, {t[0], t[1], t[2]}});
  TypedGraph out{load_graph(records), {}};
  TypeAssignment types;
  for (const auto& [entity, cls] : syn.types) {
    if (out.graph.vocab.has_entity(entity)) types[out.graph.vocab.entity_id(entity)].insert(cls);
  }
  ConstraintDeclarations decls;
  for (std::size_t r = 0; r < syn.relation_names.size(); ++r) {
    if (!out.graph.vocab.has_relation(syn.relation_names[r])) continue;
    decls[out.graph.vocab.relation_id(syn.relation_names[r])] = {
        {syn.class_names[syn.signatures[r].domain_class]}, {syn.class_names[syn.signatures[r].range_class]}};
  }
  out.schema = resolve_schema_constraints(out.graph.vocab, out.graph.store, types, decls);
  return out;
}

Outcome metric_oracle() {
  Rng rng(2024);
  double worst_pr = 0.0;
  std::size_t auroc_mismatch = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + uniform_index(rng, 11);
    std::vector<ScoredExample> xs(n);
    std::vector<oracle::Labeled> plain(n);
    const bool ties = trial % 2 == 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = ties ? static_cast<double>(uniform_index(rng, 4)) : uniform_unit(rng);
      const bool pos = i == 0 || (i != 1 && uniform_unit(rng) < 0.5);
      xs[i] = {{}, s, pos};
      plain[i] = {s, pos};
    }
    worst_pr = std::max(worst_pr, std::abs(auprc(xs) - oracle::auprc(plain)));
    auroc_mismatch += auroc(xs) != oracle::auroc(plain);
  }
  return {worst_pr <= 1e-12 && auroc_mismatch == 0,
          fmt::format("1000 trials, max |auprc - oracle| = {:.2e}, auroc mismatches = {}", worst_pr, auroc_mismatch)};
}

Outcome scoring_oracle() {
  Rng rng(7);
  double worst = 0.0;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); };
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + uniform_index(rng, 6), m = 1 + uniform_index(rng, 3), d = 1 + uniform_index(rng, 8);
    const Triple t{static_cast<EntityId>(uniform_index(rng, n)), static_cast<RelationId>(uniform_index(rng, m)),
                   static_cast<EntityId>(uniform_index(rng, n))};
    RescalParams r{oracle::random_matrix(n, d, rng), {}};
    for (std::size_t k = 0; k < m; ++k) r.R.push_back(oracle::random_matrix(d, d, rng));
    worst = std::max(worst, rel(rescal_score(r, t), oracle::rescal_score(r.A, r.R[t.p], t)));

    const Distance dist = trial % 2 ? Distance::l1 : Distance::l2;
    TransEParams te{oracle::random_matrix(n, d, rng), oracle::random_matrix(m, d, rng), dist};
    worst = std::max(worst, rel(transe_score(te, t), oracle::transe_score(te.A, te.relations, dist, t)));

    const std::size_t h = 1 + uniform_index(rng, 8);
    MwnnParams mw{oracle::random_matrix(n, d, rng), oracle::random_matrix(m, d, rng),
                  oracle::random_matrix(h, 3 * d, rng), oracle::random_matrix(h, 1, rng, 2.0).col(0),
                  0.5 + 0.5 * uniform_unit(rng)};
    worst = std::max(worst, rel(mwnn_score(mw, t), oracle::mwnn_score(mw, t)));
    const Matrix mask = dropconnect_mask(h, 3 * d, 0.3, rng);
    worst = std::max(worst, rel(mwnn_score(mw, t, &mask), oracle::mwnn_score(mw, t, &mask)));
  }
  return {worst <= 1e-10, fmt::format("1000 instances x 3 models, max relative error {:.2e}", worst)};
}

Outcome gradient_checks() {
  Rng rng(99);
  double worst_transe = 0.0, worst_mwnn = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    auto c = instances::random_transe_case(rng);
    const auto g = transe_batch_gradient(c.params, c.batch, c.corruptions, c.gamma);
    auto loss = [&] { return transe_batch_loss(c.params, c.batch, c.corruptions, c.gamma); };
    worst_transe = std::max({worst_transe, oracle::relative_error(g.A, oracle::finite_difference(c.params.A, loss)),
                             oracle::relative_error(g.relations, oracle::finite_difference(c.params.relations, loss))});

    auto w = instances::random_mwnn_case(rng, trial % 2 == 1);
    const auto gw = mwnn_batch_gradient(w.params, w.batch, w.corruptions, &w.mask, w.l1, w.l2);
    auto wloss = [&] { return mwnn_batch_loss(w.params, w.batch, w.corruptions, &w.mask, w.l1, w.l2); };
    Matrix beta = w.params.beta;
    auto beta_loss = [&] {
      w.params.beta = beta.col(0);
      return wloss();
    };
    worst_mwnn = std::max({worst_mwnn, oracle::relative_error(gw.A, oracle::finite_difference(w.params.A, wloss)),
                           oracle::relative_error(gw.relations, oracle::finite_difference(w.params.relations, wloss)),
                           oracle::relative_error(gw.W, oracle::finite_difference(w.params.W, wloss)),
                           oracle::relative_error(gw.beta, oracle::finite_difference(beta, beta_loss))});
  }
  return {worst_transe <= 1e-4 && worst_mwnn <= 1e-4,
          fmt::format("100 instances, max relative error transe {:.2e}, mwnn {:.2e}", worst_transe, worst_mwnn)};
}

// Block-structured 0/1 tensor: entity e belongs to group e % d and X_k(s, o)
// = B_k(group(s), group(o)), so one-hot A with R_k = B_k fits exactly.
TripleStore exact_rank_store(std::size_t n, std::size_t m, std::size_t d, Rng& rng) {
  TripleStore store(n, m);
  for (RelationId k = 0; k < m; ++k) {
    Matrix B = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < B.size(); ++i) B.data()[i] = uniform_unit(rng) < 0.5 ? 1.0 : 0.0;
    for (EntityId s = 0; s < n; ++s) {
      for (EntityId o = 0; o < n; ++o) {
        if (B(s % d, o % d) > 0) store.insert({s, k, o});
      }
    }
  }
  return store;
}

Outcome als_monotonicity() {
  Rng rng(31337);
  std::size_t violations = 0, exact = 0, exact_reached = 0;
  double worst_increase = 0.0, worst_exact = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 5 + uniform_index(rng, 26), m = 1 + uniform_index(rng, 5), d = 1 + uniform_index(rng, 5);
    const bool exact_rank = trial % 5 == 0;
    const auto store = exact_rank ? exact_rank_store(n, m, d, rng) : oracle::random_store(n, m, 3 * n, rng);
    const auto sem = trial % 3 == 1 ? oracle::random_semantics(store, rng) : RelationSemantics::unconstrained(n, m);
    const AlsProblem problem(store, sem);
    Hyperparams hp;
    hp.dim = d;
    hp.seed = trial;
    if (!exact_rank && trial % 2) hp.lambda_a = hp.lambda_r = 0.05;
    auto state = als_start(std::get<RescalParams>(init_params(ModelKind::rescal, n, m, hp)), problem, hp);
    for (int sweep = 0; sweep < 20; ++sweep) {
      const double before = state.loss;
      state = als_sweep(std::move(state), problem, hp);
      worst_increase = std::max(worst_increase, state.loss - before);
      violations += state.loss > before + 1e-9;
    }
    if (exact_rank) {
      ++exact;
      exact_reached += state.loss <= 1e-6;
      worst_exact = std::max(worst_exact, state.loss);
    }
  }
  return {violations == 0 && exact_reached == exact,
          fmt::format("50 instances x 20 sweeps, {} increases (max {:.1e}); exact-rank {}/{} at <= 1e-6 (worst {:.2e})",
                      violations, worst_increase, exact_reached, exact, worst_exact)};
}

Outcome constraint_soundness() {
  const auto syn = generate_synthetic(SyntheticSpec{});
  const auto tg = typed_graph(syn);
  const auto& store = tg.graph.store;
  const std::size_t n = store.num_entities(), m = store.num_relations();
  std::size_t corruptions = 0, violations = 0, collisions = 0, negatives = 0;
  for (auto regime : {Provenance::schema, Provenance::lcwa}) {
    auto split = partition_positives(store, 5);
    const auto train = store_of(split.train, n, m);
    const auto sem = regime == Provenance::schema ? tg.schema : lcwa_semantics(train);
    attach_negatives(split, store, sem);
    for (const auto* pool : {&split.holdout_negatives, &split.validation_negatives, &split.probe_negatives}) {
      for (const auto& t : *pool) {
        ++negatives;
        violations += !sem.admits(t);
        collisions += store.contains(t);
      }
    }
    Rng rng(17);
    const auto mode = regime == Provenance::schema ? CorruptionMode::subject_and_object : CorruptionMode::object_only;
    for (std::size_t drawn = 0; drawn < 100000;) {
      const auto batch = corrupt_for_training(split.train, sem, mode, 1, rng);
      for (const auto& c : batch.items) violations += !sem.admits(c.triple);
      drawn += batch.items.size();
      corruptions += batch.items.size();
    }
  }
  return {violations == 0 && collisions == 0 && negatives > 0,
          fmt::format("{} training corruptions + {} evaluation negatives under schema and lcwa: {} violations, "
                      "{} collisions with positives",
                      corruptions, negatives, violations, collisions)};
}

Outcome unconstrained_reduction() {
  Rng rng(5);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 4 + uniform_index(rng, 12), m = 1 + uniform_index(rng, 3), d = 1 + uniform_index(rng, 5);
    const auto store = oracle::random_store(n, m, 3 * n, rng);
    const auto all = RelationSemantics::unconstrained(n, m);

    // RESCAL: sparse block loss vs. the dense full-tensor loss.
    RescalParams r{oracle::random_matrix(n, d, rng), {}};
    for (std::size_t k = 0; k < m; ++k) r.R.push_back(oracle::random_matrix(d, d, rng));
    Hyperparams hp;
    hp.dim = d;
    hp.lambda_a = 0.1;
    hp.lambda_r = 0.2;
    double dense = 0.0;
    for (RelationId k = 0; k < m; ++k) {
      const Matrix X = r.A * r.R[k] * r.A.transpose();
      for (EntityId s = 0; s < n; ++s) {
        for (EntityId o = 0; o < n; ++o) {
          const double res = (store.contains({s, k, o}) ? 1.0 : 0.0) - X(s, o);
          dense += res * res;
        }
      }
    }
    dense += 0.1 * r.A.squaredNorm();
    for (const auto& R : r.R) dense += 0.2 * R.squaredNorm();
    const double sparse = rescal_loss(r, store, all, hp);
    worst = std::max(worst, std::abs(sparse - dense) / dense);

    // SGD models: corruptions drawn from all-entity semantics equal plain
    // uniform draws over the entity set with the same stream.
    const std::uint64_t seed = 1000 + trial;
    Rng a(seed), b(seed);
    const auto constrained = corrupt_for_training(store.triples(), all, CorruptionMode::subject_and_object, 1, a);
    std::vector<Corruption> uniform;
    for (std::size_t i = 0; i < store.size(); ++i) {
      const Triple& t = store.triples()[i];
      uniform.push_back({i, {static_cast<EntityId>(uniform_index(b, n)), t.p, t.o}, CorruptedSide::subject});
      uniform.push_back({i, {t.s, t.p, static_cast<EntityId>(uniform_index(b, n))}, CorruptedSide::object});
    }
    TransEParams te{oracle::random_matrix(n, d, rng), oracle::random_matrix(m, d, rng), Distance::l1};
    const double lt_c = transe_batch_loss(te, store.triples(), constrained.items, 1.0);
    const double lt_u = transe_batch_loss(te, store.triples(), uniform, 1.0);
    worst = std::max(worst, std::abs(lt_c - lt_u) / std::max(lt_u, 1e-300));

    Rng c(seed), e(seed);
    const auto mw_c = corrupt_for_training(store.triples(), all, CorruptionMode::object_only, 5, c);
    std::vector<Corruption> mw_u;
    for (std::size_t i = 0; i < store.size(); ++i) {
      const Triple& t = store.triples()[i];
      for (int k = 0; k < 5; ++k) {
        mw_u.push_back({i, {t.s, t.p, static_cast<EntityId>(uniform_index(e, n))}, CorruptedSide::object});
      }
    }
    MwnnParams mw{oracle::random_matrix(n, d, rng), oracle::random_matrix(m, d, rng), oracle::random_matrix(d, 3 * d, rng),
                  oracle::random_matrix(d, 1, rng).col(0)};
    const double lm_c = mwnn_batch_loss(mw, store.triples(), mw_c.items, nullptr, 0.01, 0.01);
    const double lm_u = mwnn_batch_loss(mw, store.triples(), mw_u, nullptr, 0.01, 0.01);
    worst = std::max(worst, std::abs(lm_c - lm_u) / lm_u);
  }
  return {worst <= 1e-12, fmt::format("20 instances x 3 losses, max relative difference {:.2e}", worst)};
}

Outcome transe_norm_invariant() {
  const auto syn = generate_synthetic(SyntheticSpec{});
  const auto tg = typed_graph(syn);
  const auto& store = tg.graph.store;
  const auto split = partition_positives(store, 3);
  const auto sem = lcwa_semantics(store_of(split.train, store.num_entities(), store.num_relations()));
  Hyperparams hp;
  hp.seed = 3;
  auto params = std::get<TransEParams>(init_params(ModelKind::transe, store.num_entities(), store.num_relations(), hp));
  Rng rng = derive_rng(hp.seed, 1);
  std::vector<Triple> order = split.train;
  double worst = 0.0;
  std::size_t steps = 0;
  for (int epoch = 0; epoch < 5; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t first = 0; first < order.size(); first += hp.batch_size) {
      const std::span<const Triple> batch(order.data() + first, std::min(hp.batch_size, order.size() - first));
      transe_batch_step(params, batch, sem, hp, rng);
      ++steps;
      for (Eigen::Index r = 0; r < params.A.rows(); ++r) {
        worst = std::max(worst, std::abs(params.A.row(r).norm() - 1.0));
      }
    }
  }
  return {worst <= 1e-6, fmt::format("5 epochs, {} steps, max | ||a_e|| - 1 | = {:.2e}", steps, worst)};
}

struct DirectionalRuns {
  // auprc[model][regime][seed]
  std::map<std::string, std::map<std::string, std::vector<double>>> auprc;
  GridResult first_grid;
  double seconds = 0.0;
};

DirectionalRuns run_directional(const fs::path& root) {
  DirectionalRuns runs;
  const auto start = std::chrono::steady_clock::now();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SyntheticSpec spec;
    spec.seed = seed;
    const fs::path data = root / fmt::format("seed{}", seed);
    cmd_synth(spec, data / "data");
    GridConfig grid;
    grid.base.triples = data / "data" / "triples.tsv";
    grid.base.types = data / "data" / "types.tsv";
    grid.base.constraints = data / "data" / "constraints.tsv";
    grid.base.out = data / "out";
    grid.base.dataset = "synthetic";
    grid.base.hp.seed = seed;
    grid.dims = {10};
    auto result = cmd_grid(grid);
    for (const auto& r : result.reports) runs.auprc[r.model][r.regime].push_back(r.auprc);
    for (const auto& f : result.failures) fmt::print("  grid failure (seed {}): {}\n", seed, f);
    if (seed == 0) runs.first_grid = std::move(result);
  }
  runs.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return runs;
}

Outcome directional(const DirectionalRuns& runs) {
  bool pass = runs.seconds < 15 * 60;
  std::ostringstream detail;
  for (const auto* model : {"rescal", "transe", "mwnn"}) {
    const auto& by_regime = runs.auprc.at(model);
    const auto& none = by_regime.at("none");
    detail << model << ":";
    for (const auto* regime : {"schema", "lcwa"}) {
      const auto& constrained = by_regime.at(regime);
      std::size_t wins = 0;
      for (std::size_t s = 0; s < none.size(); ++s) wins += constrained.at(s) > none[s];
      pass = pass && wins >= 4 && none.size() == 5;
      detail << fmt::format(" {} beats none {}/5", regime, wins);
    }
    double mean_none = 0, mean_schema = 0, mean_lcwa = 0;
    for (std::size_t s = 0; s < none.size(); ++s) {
      mean_none += none[s] / 5;
      mean_schema += by_regime.at("schema")[s] / 5;
      mean_lcwa += by_regime.at("lcwa")[s] / 5;
    }
    detail << fmt::format(" (mean auprc none {:.3f}, schema {:.3f}, lcwa {:.3f}); ", mean_none, mean_schema, mean_lcwa);
  }
  detail << fmt::format("45 fits in {:.0f} s", runs.seconds);
  return {pass, detail.str()};
}

Outcome end_to_end_grid(const DirectionalRuns& runs) {
  const auto& grid = runs.first_grid;
  const std::string table = io::read_text(grid.table);
  std::istringstream lines(table);
  std::string line;
  std::getline(lines, line);
  bool pass = line == comparison_csv_header() && grid.failures.empty();
  std::size_t rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    std::vector<std::string> fields;
    std::istringstream cells(line);
    for (std::string cell; std::getline(cells, cell, ',');) fields.push_back(cell);
    if (fields.size() != 6) {
      pass = false;
      continue;
    }
    const double pr = std::stod(fields[4]), roc = std::stod(fields[5]);
    pass = pass && pr >= 0 && pr <= 1 && roc >= 0 && roc <= 1 && fields[3] == "10";
  }
  pass = pass && rows == 9;
  return {pass, fmt::format("{} rows in {}, {} failed cells", rows, grid.table.filename().string(),
                            grid.failures.size())};
}

}  // namespace

int main() {
  const fs::path root = scratch_dir();
  run("metric oracle equivalence", 10, metric_oracle);
  run("scoring oracle equivalence", 10, scoring_oracle);
  run("gradient checks", 60, gradient_checks);
  run("ALS monotonicity", 120, als_monotonicity);
  run("constraint soundness", 60, constraint_soundness);
  run("unconstrained reduction", 60, unconstrained_reduction);
  run("TransE norm invariant", 60, transe_norm_invariant);

  DirectionalRuns runs;
  run("directional reproduction", 15 * 60, [&] {
    runs = run_directional(root);
    return directional(runs);
  });
  run("end-to-end grid", 60, [&] { return end_to_end_grid(runs); });

  fs::remove_all(root);
  fmt::print("{} criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
