#include "kgtc/sgd.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <fmt/core.h>

#include "kgtc/error.hpp"
#include "kgtc/metrics.hpp"

namespace kgtc {
namespace {

constexpr double kProbabilityFloor = 1e-12;
constexpr std::uint64_t kTrainingStream = 0x5EED;

double sign(double x) { return (x > 0) - (x < 0); }

Vector translation_residual(const TransEParams& p, const Triple& t) {
  return (p.A.row(t.s) + p.relations.row(t.p) - p.A.row(t.o)).transpose();
}

// d distance / d residual.
Vector distance_gradient(const Vector& diff, Distance distance) {
  if (distance == Distance::l1) return diff.unaryExpr(&sign);
  const double norm = diff.norm();
  return norm > 0 ? Vector(diff / norm) : Vector(Vector::Zero(diff.size()));
}

void add_distance_gradient(TransEGradient& g, const Triple& t, const Vector& dd, double weight) {
  g.A.row(t.s) += weight * dd.transpose();
  g.relations.row(t.p) += weight * dd.transpose();
  g.A.row(t.o) -= weight * dd.transpose();
}

void check_batch(std::span<const Triple> batch) {
  if (batch.empty()) throw std::invalid_argument("batch must not be empty");
}

struct Forward {
  Vector x;       // [a_s; r_p; a_o]
  Vector hidden;  // tanh(W_eff x)
  double theta = 0.5;
};

Forward forward(const MwnnParams& p, const Matrix& W_eff, const Triple& t) {
  const Eigen::Index d = p.A.cols();
  Forward f;
  f.x.resize(3 * d);
  f.x << p.A.row(t.s).transpose(), p.relations.row(t.p).transpose(), p.A.row(t.o).transpose();
  f.hidden = (W_eff * f.x).array().tanh();
  f.theta = 1.0 / (1.0 + std::exp(-p.beta.dot(f.hidden)));
  return f;
}

double clamped(double theta) { return std::clamp(theta, kProbabilityFloor, 1.0 - kProbabilityFloor); }

Matrix effective_weights(const MwnnParams& p, const Matrix* mask) {
  return mask ? Matrix(p.W.cwiseProduct(*mask)) : p.W;
}

// Accumulates the data-term gradient of one example. `dloss_du` is the
// derivative of the example's loss w.r.t. the pre-sigmoid activation.
void backprop(const MwnnParams& p, const Matrix& W_eff, const Matrix* mask, const Triple& t,
              const Forward& f, double dloss_du, MwnnGradient& g) {
  const Eigen::Index d = p.A.cols();
  g.beta += dloss_du * f.hidden;
  const Vector dz = dloss_du * p.beta.cwiseProduct((1.0 - f.hidden.array().square()).matrix());
  if (mask) {
    g.W += (dz * f.x.transpose()).cwiseProduct(*mask);
  } else {
    g.W += dz * f.x.transpose();
  }
  const Vector dx = W_eff.transpose() * dz;
  g.A.row(t.s) += dx.segment(0, d).transpose();
  g.relations.row(t.p) += dx.segment(d, d).transpose();
  g.A.row(t.o) += dx.segment(2 * d, d).transpose();
}

template <typename Tensor>
void adagrad_update(Tensor& param, Tensor& accum, const Tensor& grad, double lr, double eps) {
  accum.array() += grad.array().square();
  param.array() -= lr * grad.array() / (accum.array() + eps).sqrt();
}

}  // namespace

double transe_batch_loss(const TransEParams& params, std::span<const Triple> batch,
                         std::span<const Corruption> corruptions, double gamma) {
  double loss = 0.0;
  for (const Corruption& c : corruptions) {
    const double term = gamma + transe_score(params, c.triple) - transe_score(params, batch[c.positive]);
    if (term > 0) loss += term;
  }
  return loss;
}

TransEGradient transe_batch_gradient(const TransEParams& params, std::span<const Triple> batch,
                                     std::span<const Corruption> corruptions, double gamma) {
  TransEGradient g{Matrix::Zero(params.A.rows(), params.A.cols()),
                   Matrix::Zero(params.relations.rows(), params.relations.cols())};
  for (const Corruption& c : corruptions) {
    const Triple& pos = batch[c.positive];
    const Vector diff_pos = translation_residual(params, pos);
    const Vector diff_neg = translation_residual(params, c.triple);
    const auto dist = [&](const Vector& v) {
      return params.distance == Distance::l1 ? v.lpNorm<1>() : v.norm();
    };
    // gamma + theta(neg) - theta(pos) = gamma - dist(neg) + dist(pos)
    if (gamma - dist(diff_neg) + dist(diff_pos) <= 0) continue;
    add_distance_gradient(g, pos, distance_gradient(diff_pos, params.distance), 1.0);
    add_distance_gradient(g, c.triple, distance_gradient(diff_neg, params.distance), -1.0);
  }
  return g;
}

double transe_batch_step(TransEParams& params, std::span<const Triple> batch,
                         const RelationSemantics& semantics, const Hyperparams& hp, Rng& rng) {
  check_batch(batch);
  const CorruptionBatch corrupted =
      corrupt_for_training(batch, semantics, CorruptionMode::subject_and_object, 1, rng);
  const double loss = transe_batch_loss(params, batch, corrupted.items, hp.gamma);
  if (loss == 0.0) return loss;

  const TransEGradient g = transe_batch_gradient(params, batch, corrupted.items, hp.gamma);
  std::vector<EntityId> touched;
  std::vector<RelationId> relations;
  touched.reserve(2 * batch.size() + corrupted.items.size());
  for (const Triple& t : batch) {
    touched.push_back(t.s);
    touched.push_back(t.o);
    relations.push_back(t.p);
  }
  for (const Corruption& c : corrupted.items) {
    touched.push_back(c.triple.s);
    touched.push_back(c.triple.o);
  }
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  std::sort(relations.begin(), relations.end());
  relations.erase(std::unique(relations.begin(), relations.end()), relations.end());

  for (EntityId e : touched) params.A.row(e) -= hp.learning_rate * g.A.row(e);
  for (RelationId r : relations) params.relations.row(r) -= hp.learning_rate * g.relations.row(r);
  normalize_rows(params.A, touched);
  return loss;
}

AdagradState AdagradState::zeros_like(const MwnnParams& p) {
  return {Matrix::Zero(p.A.rows(), p.A.cols()), Matrix::Zero(p.relations.rows(), p.relations.cols()),
          Matrix::Zero(p.W.rows(), p.W.cols()), Vector::Zero(p.beta.size())};
}

double mwnn_batch_loss(const MwnnParams& params, std::span<const Triple> batch,
                       std::span<const Corruption> corruptions, const Matrix* mask, double l1, double l2) {
  const Matrix W_eff = effective_weights(params, mask);
  double loss = 0.0;
  for (const Triple& t : batch) loss -= std::log(clamped(forward(params, W_eff, t).theta));
  for (const Corruption& c : corruptions) {
    loss -= std::log(1.0 - clamped(forward(params, W_eff, c.triple).theta));
  }
  loss += l1 * (params.W.lpNorm<1>() + params.beta.lpNorm<1>());
  loss += l2 * (params.W.squaredNorm() + params.beta.squaredNorm());
  return loss;
}

MwnnGradient mwnn_batch_gradient(const MwnnParams& params, std::span<const Triple> batch,
                                 std::span<const Corruption> corruptions, const Matrix* mask, double l1,
                                 double l2) {
  const Matrix W_eff = effective_weights(params, mask);
  MwnnGradient g{Matrix::Zero(params.A.rows(), params.A.cols()),
                 Matrix::Zero(params.relations.rows(), params.relations.cols()),
                 Matrix::Zero(params.W.rows(), params.W.cols()), Vector::Zero(params.beta.size())};
  for (const Triple& t : batch) {
    const Forward f = forward(params, W_eff, t);
    backprop(params, W_eff, mask, t, f, f.theta - 1.0, g);
  }
  for (const Corruption& c : corruptions) {
    const Forward f = forward(params, W_eff, c.triple);
    backprop(params, W_eff, mask, c.triple, f, f.theta, g);
  }
  g.W += l1 * params.W.unaryExpr(&sign) + 2.0 * l2 * params.W;
  g.beta += l1 * params.beta.unaryExpr(&sign) + 2.0 * l2 * params.beta;
  return g;
}

Matrix dropconnect_mask(Eigen::Index rows, Eigen::Index cols, double drop_probability, Rng& rng) {
  Matrix mask(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) mask(r, c) = uniform_unit(rng) < drop_probability ? 0.0 : 1.0;
  }
  return mask;
}

double mwnn_batch_step(MwnnParams& params, AdagradState& acc, std::span<const Triple> batch,
                       const RelationSemantics& semantics, const Hyperparams& hp, Rng& rng) {
  check_batch(batch);
  const CorruptionBatch corrupted =
      corrupt_for_training(batch, semantics, CorruptionMode::object_only, hp.corruptions, rng);
  const Matrix mask = dropconnect_mask(params.W.rows(), params.W.cols(), hp.dropconnect, rng);
  const double loss = mwnn_batch_loss(params, batch, corrupted.items, &mask, hp.l1, hp.l2);
  const MwnnGradient g = mwnn_batch_gradient(params, batch, corrupted.items, &mask, hp.l1, hp.l2);

  // Rows without gradient would receive a zero update; skip them.
  std::vector<EntityId> entities;
  std::vector<RelationId> relations;
  for (const Triple& t : batch) {
    entities.push_back(t.s);
    entities.push_back(t.o);
    relations.push_back(t.p);
  }
  for (const Corruption& c : corrupted.items) entities.push_back(c.triple.o);
  std::sort(entities.begin(), entities.end());
  entities.erase(std::unique(entities.begin(), entities.end()), entities.end());
  std::sort(relations.begin(), relations.end());
  relations.erase(std::unique(relations.begin(), relations.end()), relations.end());

  const double lr = hp.learning_rate;
  const double eps = hp.adagrad_epsilon;
  for (EntityId e : entities) {
    Vector row = params.A.row(e).transpose(), acc_row = acc.A.row(e).transpose();
    adagrad_update<Vector>(row, acc_row, g.A.row(e).transpose(), lr, eps);
    params.A.row(e) = row.transpose();
    acc.A.row(e) = acc_row.transpose();
  }
  for (RelationId r : relations) {
    Vector row = params.relations.row(r).transpose(), acc_row = acc.relations.row(r).transpose();
    adagrad_update<Vector>(row, acc_row, g.relations.row(r).transpose(), lr, eps);
    params.relations.row(r) = row.transpose();
    acc.relations.row(r) = acc_row.transpose();
  }
  adagrad_update(params.W, acc.W, g.W, lr, eps);
  adagrad_update(params.beta, acc.beta, g.beta, lr, eps);
  return loss;
}

FitResult fit_sgd(ModelKind kind, const TripleStore& train, const RelationSemantics& semantics,
                  const SplitBundle& split, const Hyperparams& hp) {
  if (kind == ModelKind::rescal) throw ConfigError("fit_sgd trains transe or mwnn, not rescal");
  hp.validate();
  const auto start = std::chrono::steady_clock::now();
  ModelParams params = init_params(kind, semantics.num_entities(), semantics.num_relations(), hp);
  Rng rng = derive_rng(hp.seed, kTrainingStream);
  AdagradState acc;
  if (auto* mw = std::get_if<MwnnParams>(&params)) acc = AdagradState::zeros_like(*mw);

  const bool has_probe = !split.early_stop_probe.empty() && !split.probe_negatives.empty();
  auto probe = [&] {
    return has_probe ? ranking_auprc(params, split.early_stop_probe, split.probe_negatives) : 0.0;
  };
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  FitResult result{params, {}};
  EarlyStopping stopper(hp.tolerance, hp.sgd_patience);
  const double initial_auprc = probe();
  result.log.records.push_back({0, 0.0, initial_auprc, elapsed()});

  std::vector<Triple> order = train.triples();
  if (order.empty()) return result;
  for (std::size_t epoch = 1; epoch <= hp.max_epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
    double epoch_loss = 0.0;
    for (std::size_t first = 0; first < order.size(); first += hp.batch_size) {
      const std::span<const Triple> batch(order.data() + first, std::min(hp.batch_size, order.size() - first));
      if (auto* te = std::get_if<TransEParams>(&params)) {
        epoch_loss += transe_batch_step(*te, batch, semantics, hp, rng);
      } else {
        epoch_loss += mwnn_batch_step(std::get<MwnnParams>(params), acc, batch, semantics, hp, rng);
      }
    }
    const double auprc = probe();
    result.log.records.push_back({epoch, epoch_loss, auprc, elapsed()});
    const auto verdict = stopper.observe(auprc);
    if (verdict.new_best || !has_probe) {
      result.params = params;
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
