#include "kgtc/als.hpp"

#include <algorithm>
#include <chrono>
#include <map>

#include <Eigen/Eigenvalues>

#include "kgtc/log.hpp"
#include "kgtc/metrics.hpp"

namespace kgtc {
namespace {

constexpr double kMinRidge = 1e-8;
constexpr int kMaxBacktracks = 12;

Matrix gram(const Matrix& A, const std::vector<EntityId>& rows) {
  Matrix G = Matrix::Zero(A.cols(), A.cols());
  for (EntityId r : rows) G.selfadjointView<Eigen::Lower>().rankUpdate(A.row(r).transpose());
  return G.selfadjointView<Eigen::Lower>();
}

struct BlockGrams {
  std::vector<Matrix> domain;
  std::vector<Matrix> range;
};

BlockGrams block_grams(const Matrix& A, const AlsProblem& problem) {
  BlockGrams g;
  g.domain.reserve(problem.blocks().size());
  g.range.reserve(problem.blocks().size());
  for (const auto& block : problem.blocks()) {
    g.domain.push_back(gram(A, block.domain));
    g.range.push_back(gram(A, block.range));
  }
  return g;
}

// Squared residual of one relation block (no regularizers).
double block_residual(const Matrix& A, const Matrix& R, const AlsProblem::Block& block,
                      const Matrix& gram_domain, const Matrix& gram_range) {
  double cross = 0.0;
  for (const auto& [s, o] : block.pairs) cross += A.row(s).dot(R * A.row(o).transpose());
  const double fit = (R.transpose() * gram_domain * R * gram_range).trace();
  return static_cast<double>(block.pairs.size()) - 2.0 * cross + fit;
}

double regularizer(const RescalParams& params, const Hyperparams& hp) {
  double r = hp.lambda_a * params.A.squaredNorm();
  if (hp.lambda_r > 0) {
    for (const auto& Rk : params.R) r += hp.lambda_r * Rk.squaredNorm();
  }
  return r;
}

double loss_with_grams(const RescalParams& params, const AlsProblem& problem, const BlockGrams& g,
                       const Hyperparams& hp) {
  double total = regularizer(params, hp);
  for (std::size_t k = 0; k < problem.blocks().size(); ++k) {
    total += block_residual(params.A, params.R[k], problem.blocks()[k], g.domain[k], g.range[k]);
  }
  return total;
}

// argmin_R ||X - A_d R A_r'||^2 + lambda ||R||^2 through the eigenbases of the
// two Gram matrices.
Matrix solve_relation(const Matrix& A, const AlsProblem::Block& block, const Matrix& gram_domain,
                      const Matrix& gram_range, double lambda, std::size_t relation) {
  const Eigen::Index d = A.cols();
  Matrix B = Matrix::Zero(d, d);
  for (const auto& [s, o] : block.pairs) B.noalias() += A.row(s).transpose() * A.row(o);

  Eigen::SelfAdjointEigenSolver<Matrix> eig_d(gram_domain);
  Eigen::SelfAdjointEigenSolver<Matrix> eig_r(gram_range);
  const Vector sd = eig_d.eigenvalues().cwiseMax(0.0);
  const Vector sr = eig_r.eigenvalues().cwiseMax(0.0);
  Matrix denom = sd * sr.transpose();

  const double scale = std::max(1.0, denom.maxCoeff());
  double ridge = lambda;
  if ((denom.array() + lambda).minCoeff() <= 1e-12 * scale) {
    ridge = std::max(lambda, kMinRidge);
    log::debug("als: singular normal equations for relation {}; ridge {}", relation, ridge);
  }
  denom.array() += ridge;
  const Matrix C = eig_d.eigenvectors().transpose() * B * eig_r.eigenvectors();
  return eig_d.eigenvectors() * C.cwiseQuotient(denom) * eig_r.eigenvectors().transpose();
}

// Jacobi-style row update: every a_i solves its own least-squares problem
// against the current A on the other side of each block.
Matrix propose_entities(const RescalParams& params, const AlsProblem& problem, const BlockGrams& g,
                        const Hyperparams& hp) {
  const Matrix& A = params.A;
  const Eigen::Index n = A.rows();
  const Eigen::Index d = A.cols();
  const std::size_t m = problem.blocks().size();

  std::vector<Matrix> domain_term(m), range_term(m);
  for (std::size_t k = 0; k < m; ++k) {
    const Matrix& R = params.R[k];
    domain_term[k] = R * g.range[k] * R.transpose();
    range_term[k] = R.transpose() * g.domain[k] * R;
  }

  // Membership signature per entity: bit 2k for domain_k, bit 2k+1 for range_k.
  std::vector<std::vector<std::uint8_t>> signature(n, std::vector<std::uint8_t>(2 * m, 0));
  Matrix rhs = Matrix::Zero(n, d);
  for (std::size_t k = 0; k < m; ++k) {
    const auto& block = problem.blocks()[k];
    for (EntityId e : block.domain) signature[e][2 * k] = 1;
    for (EntityId e : block.range) signature[e][2 * k + 1] = 1;
    const Matrix& R = params.R[k];
    for (const auto& [s, o] : block.pairs) {
      rhs.row(s).noalias() += (R * A.row(o).transpose()).transpose();
      rhs.row(o).noalias() += A.row(s) * R;
    }
  }

  std::map<std::vector<std::uint8_t>, Eigen::LDLT<Matrix>> solvers;
  Matrix proposal = A;
  const double ridge = std::max(hp.lambda_a, kMinRidge);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& sig = signature[i];
    if (std::none_of(sig.begin(), sig.end(), [](std::uint8_t b) { return b != 0; })) {
      // Outside every block only the regularizer sees the row.
      if (hp.lambda_a > 0) proposal.row(i).setZero();
      continue;
    }
    auto it = solvers.find(sig);
    if (it == solvers.end()) {
      Matrix M = hp.lambda_a * Matrix::Identity(d, d);
      for (std::size_t k = 0; k < m; ++k) {
        if (sig[2 * k]) M += domain_term[k];
        if (sig[2 * k + 1]) M += range_term[k];
      }
      Eigen::LDLT<Matrix> ldlt(M);
      const Vector diag = ldlt.vectorD();
      if (ldlt.info() != Eigen::Success || diag.minCoeff() <= 1e-12 * std::max(1.0, diag.maxCoeff())) {
        ldlt.compute(M + (ridge - hp.lambda_a) * Matrix::Identity(d, d));
      }
      it = solvers.emplace(sig, std::move(ldlt)).first;
    }
    proposal.row(i) = it->second.solve(rhs.row(i).transpose()).transpose();
  }
  return proposal;
}

}  // namespace

AlsProblem::AlsProblem(const TripleStore& store, const RelationSemantics& semantics)
    : num_entities_(semantics.num_entities()) {
  const std::size_t m = semantics.num_relations();
  blocks_.resize(m);
  std::size_t outside = 0;
  for (RelationId k = 0; k < m; ++k) {
    Block& block = blocks_[k];
    block.domain = semantics.domain(k);
    block.range = semantics.range(k);
    if (k >= store.num_relations()) continue;
    for (std::size_t idx : store.relation_triples(k)) {
      const Triple& t = store.triples()[idx];
      if (semantics.admits(t)) {
        block.pairs.emplace_back(t.s, t.o);
      } else {
        ++outside;
      }
    }
  }
  if (outside > 0) log::info("als: {} training triples fall outside their relation's block", outside);
}

double rescal_loss(const RescalParams& params, const AlsProblem& problem, const Hyperparams& hp) {
  return loss_with_grams(params, problem, block_grams(params.A, problem), hp);
}

double rescal_loss(const RescalParams& params, const TripleStore& store,
                   const RelationSemantics& semantics, const Hyperparams& hp) {
  return rescal_loss(params, AlsProblem(store, semantics), hp);
}

AlsState als_start(RescalParams params, const AlsProblem& problem, const Hyperparams& hp) {
  AlsState state;
  state.params = std::move(params);
  state.loss = rescal_loss(state.params, problem, hp);
  state.loss_history.push_back(state.loss);
  return state;
}

AlsState als_sweep(AlsState state, const AlsProblem& problem, const Hyperparams& hp) {
  RescalParams& params = state.params;
  const auto& blocks = problem.blocks();

  // R step. Relation terms are separable, so each solve is kept only if it
  // does not increase its own term.
  BlockGrams g = block_grams(params.A, problem);
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    Matrix candidate = solve_relation(params.A, blocks[k], g.domain[k], g.range[k], hp.lambda_r, k);
    const double before = block_residual(params.A, params.R[k], blocks[k], g.domain[k], g.range[k]) +
                          hp.lambda_r * params.R[k].squaredNorm();
    const double after = block_residual(params.A, candidate, blocks[k], g.domain[k], g.range[k]) +
                         hp.lambda_r * candidate.squaredNorm();
    if (after <= before) params.R[k] = std::move(candidate);
  }
  const double loss_after_r = loss_with_grams(params, problem, g, hp);

  // A step with backtracking toward the current A.
  const Matrix proposal = propose_entities(params, problem, g, hp);
  const Matrix current = params.A;
  double step = 1.0;
  double best_loss = loss_after_r;
  bool accepted = false;
  for (int attempt = 0; attempt <= kMaxBacktracks; ++attempt, step *= 0.5) {
    params.A = current + step * (proposal - current);
    const double loss = rescal_loss(params, problem, hp);
    if (loss <= loss_after_r) {
      best_loss = loss;
      accepted = true;
      break;
    }
  }
  if (!accepted) {
    params.A = current;
    log::debug("als: entity step rejected at sweep {}", state.sweep + 1);
  }

  ++state.sweep;
  state.loss = best_loss;
  state.loss_history.push_back(best_loss);
  return state;
}

FitResult fit_rescal(const TripleStore& train, const RelationSemantics& semantics,
                     const SplitBundle& split, const Hyperparams& hp) {
  hp.validate();
  const auto start = std::chrono::steady_clock::now();
  const AlsProblem problem(train, semantics);
  auto init = std::get<RescalParams>(
      init_params(ModelKind::rescal, semantics.num_entities(), semantics.num_relations(), hp));
  AlsState state = als_start(std::move(init), problem, hp);

  const bool has_probe = !split.early_stop_probe.empty() && !split.probe_negatives.empty();
  auto probe = [&](const RescalParams& p) {
    return has_probe ? ranking_auprc(ModelParams(p), split.early_stop_probe, split.probe_negatives) : 0.0;
  };
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  FitResult result{state.params, {}};
  EarlyStopping stopper(hp.tolerance, hp.patience);
  const double initial_auprc = probe(state.params);
  state.probe_auprc_history.push_back(initial_auprc);
  result.log.records.push_back({0, state.loss, initial_auprc, elapsed()});

  for (std::size_t epoch = 1; epoch <= hp.max_epochs; ++epoch) {
    state = als_sweep(std::move(state), problem, hp);
    const double auprc = probe(state.params);
    state.probe_auprc_history.push_back(auprc);
    result.log.records.push_back({epoch, state.loss, auprc, elapsed()});
    const auto verdict = stopper.observe(auprc);
    if (verdict.new_best || !has_probe) {
      result.params = state.params;
      result.log.best_epoch = epoch;
    }
    if (has_probe && verdict.stop) {
      result.log.stopped_early = epoch < hp.max_epochs;
      break;
    }
  }
  return result;
}

}  // namespace kgtc
