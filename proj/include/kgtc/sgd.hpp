#pragma once

#include <cstddef>
#include <span>

#include "kgtc/graph.hpp"
#include "kgtc/models.hpp"
#include "kgtc/random.hpp"
#include "kgtc/sampling.hpp"
#include "kgtc/training.hpp"

namespace kgtc {

// ---------------------------------------------------------------------------
// TransE: sum over corruptions of [gamma + theta(corrupted) - theta(positive)]_+
// ---------------------------------------------------------------------------

struct TransEGradient {
  Matrix A;
  Matrix relations;
};

double transe_batch_loss(const TransEParams& params, std::span<const Triple> batch,
                         std::span<const Corruption> corruptions, double gamma);

/// Gradient of transe_batch_loss; zero at hinge kinks and at zero L1 coordinates.
TransEGradient transe_batch_gradient(const TransEParams& params, std::span<const Triple> batch,
                                     std::span<const Corruption> corruptions, double gamma);

/// Draws one domain_p subject and one range_p object corruption per
/// positive, takes a plain SGD step on the batch loss and re-projects every
/// touched entity row to unit norm. Returns the batch loss before the step.
double transe_batch_step(TransEParams& params, std::span<const Triple> batch,
                         const RelationSemantics& semantics, const Hyperparams& hp, Rng& rng);

// ---------------------------------------------------------------------------
// mwNN: -sum log theta(pos) - sum log(1 - theta(neg)) + l1 |W,beta|_1 + l2 |W,beta|^2
// ---------------------------------------------------------------------------

struct MwnnGradient {
  Matrix A;
  Matrix relations;
  Matrix W;
  Vector beta;
};

/// Per-coordinate squared-gradient accumulators.
struct AdagradState {
  Matrix A;
  Matrix relations;
  Matrix W;
  Vector beta;

  static AdagradState zeros_like(const MwnnParams& params);
};

/// `mask` is the DropConnect mask on W; null means the unmasked W.
double mwnn_batch_loss(const MwnnParams& params, std::span<const Triple> batch,
                       std::span<const Corruption> corruptions, const Matrix* mask, double l1, double l2);

MwnnGradient mwnn_batch_gradient(const MwnnParams& params, std::span<const Triple> batch,
                                 std::span<const Corruption> corruptions, const Matrix* mask, double l1,
                                 double l2);

/// Entries are 1 with probability 1 - drop_probability, else 0.
Matrix dropconnect_mask(Eigen::Index rows, Eigen::Index cols, double drop_probability, Rng& rng);

/// Draws hp.corruptions range_p objects per positive and a fresh DropConnect
/// mask, then applies one AdaGrad step to A, relations, W and beta. Returns
/// the batch loss before the step.
double mwnn_batch_step(MwnnParams& params, AdagradState& accumulators, std::span<const Triple> batch,
                       const RelationSemantics& semantics, const Hyperparams& hp, Rng& rng);

/// Mini-batch training of TransE or mwNN with probe-AUPRC early stopping.
FitResult fit_sgd(ModelKind kind, const TripleStore& train, const RelationSemantics& semantics,
                  const SplitBundle& split, const Hyperparams& hp);

}  // namespace kgtc
