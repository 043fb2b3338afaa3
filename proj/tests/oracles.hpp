// Independent reference implementations used only by the tests. They work on
// plain std::vector data and brute force, never on the library's fast paths.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <vector>

#include "kgtc/graph.hpp"
#include "kgtc/models.hpp"
#include "kgtc/random.hpp"

namespace oracle {

using kgtc::Matrix;
using kgtc::Triple;

inline double rescal_score(const Matrix& A, const Matrix& R, const Triple& t) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < R.rows(); ++i) {
    for (Eigen::Index j = 0; j < R.cols(); ++j) sum += A(t.s, i) * R(i, j) * A(t.o, j);
  }
  return sum;
}

inline double transe_score(const Matrix& A, const Matrix& rel, kgtc::Distance dist, const Triple& t) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < A.cols(); ++i) {
    const double v = A(t.s, i) + rel(t.p, i) - A(t.o, i);
    acc += dist == kgtc::Distance::l1 ? std::abs(v) : v * v;
  }
  return dist == kgtc::Distance::l1 ? -acc : -std::sqrt(acc);
}

inline double mwnn_score(const kgtc::MwnnParams& p, const Triple& t, const Matrix* mask = nullptr) {
  const Eigen::Index d = p.A.cols();
  std::vector<double> x;
  for (Eigen::Index i = 0; i < d; ++i) x.push_back(p.A(t.s, i));
  for (Eigen::Index i = 0; i < d; ++i) x.push_back(p.relations(t.p, i));
  for (Eigen::Index i = 0; i < d; ++i) x.push_back(p.A(t.o, i));
  double u = 0.0;
  for (Eigen::Index h = 0; h < p.W.rows(); ++h) {
    double z = 0.0;
    for (Eigen::Index j = 0; j < p.W.cols(); ++j) {
      const double w = mask ? p.W(h, j) * (*mask)(h, j) : p.keep_probability * p.W(h, j);
      z += w * x[j];
    }
    u += p.beta(h) * std::tanh(z);
  }
  return 1.0 / (1.0 + std::exp(-u));
}

struct Labeled {
  double score;
  bool positive;
};

/// Average precision from the full precision/recall curve: one operating
/// point per distinct score, each evaluated by counting.
inline double auprc(const std::vector<Labeled>& xs) {
  std::set<double, std::greater<>> thresholds;
  std::size_t P = 0;
  for (const auto& x : xs) {
    thresholds.insert(x.score);
    P += x.positive;
  }
  double ap = 0.0, prev_recall = 0.0;
  for (double t : thresholds) {
    std::size_t tp = 0, predicted = 0;
    for (const auto& x : xs) {
      if (x.score >= t) {
        ++predicted;
        tp += x.positive;
      }
    }
    const double recall = static_cast<double>(tp) / P;
    ap += (recall - prev_recall) * static_cast<double>(tp) / predicted;
    prev_recall = recall;
  }
  return ap;
}

/// Pairwise AUROC with ties counted one half.
inline double auroc(const std::vector<Labeled>& xs) {
  double wins = 0.0;
  std::size_t pairs = 0;
  for (const auto& a : xs) {
    if (!a.positive) continue;
    for (const auto& b : xs) {
      if (b.positive) continue;
      ++pairs;
      wins += a.score > b.score ? 1.0 : (a.score == b.score ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

/// Dense materialization of every constrained block.
inline double rescal_loss(const kgtc::RescalParams& p, const kgtc::TripleStore& store,
                          const kgtc::RelationSemantics& sem, double lambda_a, double lambda_r) {
  double loss = 0.0;
  for (kgtc::RelationId k = 0; k < sem.num_relations(); ++k) {
    for (kgtc::EntityId s : sem.domain(k)) {
      for (kgtc::EntityId o : sem.range(k)) {
        const double x = store.contains({s, k, o}) ? 1.0 : 0.0;
        const double r = x - rescal_score(p.A, p.R[k], {s, k, o});
        loss += r * r;
      }
    }
  }
  double reg_a = 0.0;
  for (Eigen::Index i = 0; i < p.A.size(); ++i) reg_a += p.A.data()[i] * p.A.data()[i];
  double reg_r = 0.0;
  for (const auto& R : p.R) {
    for (Eigen::Index i = 0; i < R.size(); ++i) reg_r += R.data()[i] * R.data()[i];
  }
  return loss + lambda_a * reg_a + lambda_r * reg_r;
}

/// Central differences of `f` with respect to every entry of `m`.
inline Matrix finite_difference(Matrix& m, const std::function<double()>& f, double h = 1e-6) {
  Matrix g(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const double saved = m.data()[i];
    m.data()[i] = saved + h;
    const double up = f();
    m.data()[i] = saved - h;
    const double down = f();
    m.data()[i] = saved;
    g.data()[i] = (up - down) / (2 * h);
  }
  return g;
}

/// Norm-wise relative error. The 1e-3 floor turns the test into an absolute
/// one for (near-)zero gradients, where central differences only see roundoff.
inline double relative_error(const Matrix& analytic, const Matrix& numeric) {
  const double scale = std::max({analytic.norm(), numeric.norm(), 1e-3});
  return (analytic - numeric).norm() / scale;
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, kgtc::Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * (2.0 * kgtc::uniform_unit(rng) - 1.0);
  return m;
}

/// Random deduplicated store with n entities and m relations.
inline kgtc::TripleStore random_store(std::size_t n, std::size_t m, std::size_t count, kgtc::Rng& rng) {
  kgtc::TripleStore store(n, m);
  for (std::size_t i = 0; i < count; ++i) {
    store.insert({static_cast<kgtc::EntityId>(kgtc::uniform_index(rng, n)),
                  static_cast<kgtc::RelationId>(kgtc::uniform_index(rng, m)),
                  static_cast<kgtc::EntityId>(kgtc::uniform_index(rng, n))});
  }
  return store;
}

/// Random semantics: each relation admits a random non-empty subset per side,
/// always including the entities observed in `store` on that side.
inline kgtc::RelationSemantics random_semantics(const kgtc::TripleStore& store, kgtc::Rng& rng,
                                                double keep = 0.5) {
  const std::size_t n = store.num_entities();
  std::vector<kgtc::RelationSemantics::Relation> rels;
  for (kgtc::RelationId k = 0; k < store.num_relations(); ++k) {
    kgtc::RelationSemantics::Relation rel;
    rel.provenance = kgtc::Provenance::schema;
    std::vector<char> dom(n, 0), rng_side(n, 0);
    for (std::size_t idx : store.relation_triples(k)) {
      dom[store.triples()[idx].s] = 1;
      rng_side[store.triples()[idx].o] = 1;
    }
    for (std::size_t e = 0; e < n; ++e) {
      if (dom[e] || kgtc::uniform_unit(rng) < keep) rel.domain.push_back(static_cast<kgtc::EntityId>(e));
      if (rng_side[e] || kgtc::uniform_unit(rng) < keep) rel.range.push_back(static_cast<kgtc::EntityId>(e));
    }
    if (rel.domain.empty()) rel.domain.push_back(0);
    if (rel.range.empty()) rel.range.push_back(0);
    rels.push_back(std::move(rel));
  }
  return kgtc::RelationSemantics(n, std::move(rels));
}

}  // namespace oracle
