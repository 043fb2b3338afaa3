#pragma once

#include <cstddef>
#include <vector>

#include "kgtc/graph.hpp"
#include "kgtc/models.hpp"
#include "kgtc/sampling.hpp"
#include "kgtc/training.hpp"

namespace kgtc {

/// The per-relation blocks seen by RESCAL: the domain and range index sets
/// and the observed (subject, object) pairs that fall inside them. With
/// unconstrained semantics every block is the full n x n slice.
class AlsProblem {
 public:
  AlsProblem(const TripleStore& store, const RelationSemantics& semantics);

  struct Block {
    std::vector<EntityId> domain;
    std::vector<EntityId> range;
    std::vector<std::pair<EntityId, EntityId>> pairs;
  };

  std::size_t num_entities() const { return num_entities_; }
  const std::vector<Block>& blocks() const { return blocks_; }

 private:
  std::size_t num_entities_;
  std::vector<Block> blocks_;
};

/// sum_k ||X_k - A[dom_k] R_k A[rng_k]'||_F^2 + lambda_a ||A||^2 + lambda_r sum_k ||R_k||^2,
/// with 0/1 targets inside each block.
double rescal_loss(const RescalParams& params, const AlsProblem& problem, const Hyperparams& hp);
double rescal_loss(const RescalParams& params, const TripleStore& store,
                   const RelationSemantics& semantics, const Hyperparams& hp);

struct AlsState {
  RescalParams params;
  std::size_t sweep = 0;
  double loss = 0.0;
  std::vector<double> loss_history;  ///< loss after each sweep, starting with the initial loss
  std::vector<double> probe_auprc_history;
};

AlsState als_start(RescalParams params, const AlsProblem& problem, const Hyperparams& hp);

/// One alternating pass: exact regularized solves for every R_k, then a
/// row-wise least-squares step for A accepted only if the loss does not grow.
AlsState als_sweep(AlsState state, const AlsProblem& problem, const Hyperparams& hp);

/// ALS with early stopping on the probe AUPRC; returns the best-probe
/// parameters. `train` is the store the factorization regresses on.
FitResult fit_rescal(const TripleStore& train, const RelationSemantics& semantics,
                     const SplitBundle& split, const Hyperparams& hp);

}  // namespace kgtc
