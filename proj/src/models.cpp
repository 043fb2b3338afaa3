#include "kgtc/models.hpp"

#include <cmath>
#include <random>

#include <fmt/core.h>

#include "kgtc/error.hpp"
#include "kgtc/log.hpp"
#include "kgtc/random.hpp"

namespace kgtc {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::rescal: return "rescal";
    case ModelKind::transe: return "transe";
    case ModelKind::mwnn: return "mwnn";
  }
  return "rescal";
}

ModelKind model_kind_from_string(std::string_view s) {
  if (s == "rescal") return ModelKind::rescal;
  if (s == "transe") return ModelKind::transe;
  if (s == "mwnn") return ModelKind::mwnn;
  throw ConfigError(fmt::format("unknown model '{}'", s));
}

std::string_view to_string(Distance d) { return d == Distance::l1 ? "l1" : "l2"; }

Distance distance_from_string(std::string_view s) {
  if (s == "l1" || s == "L1") return Distance::l1;
  if (s == "l2" || s == "L2") return Distance::l2;
  throw ConfigError(fmt::format("unknown distance '{}'", s));
}

ModelKind kind_of(const ModelParams& params) {
  return static_cast<ModelKind>(params.index());
}

std::size_t num_entities(const ModelParams& params) {
  return std::visit([](const auto& p) { return static_cast<std::size_t>(p.A.rows()); }, params);
}

std::size_t num_relations(const ModelParams& params) {
  struct {
    std::size_t operator()(const RescalParams& p) const { return p.R.size(); }
    std::size_t operator()(const TransEParams& p) const { return p.relations.rows(); }
    std::size_t operator()(const MwnnParams& p) const { return p.relations.rows(); }
  } visitor;
  return std::visit(visitor, params);
}

std::size_t dim_of(const ModelParams& params) {
  return std::visit([](const auto& p) { return p.dim(); }, params);
}

void Hyperparams::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("invalid hyperparameter: " + what); };
  if (dim < 1) fail("dim must be >= 1");
  if (lambda_a < 0 || lambda_r < 0) fail("lambda_a and lambda_r must be >= 0");
  if (!(gamma > 0)) fail("gamma must be > 0");
  if (corruptions < 1) fail("corruptions must be >= 1");
  if (l1 < 0 || l2 < 0) fail("elastic-net weights must be >= 0");
  if (dropconnect < 0 || dropconnect > 1) fail("dropconnect must lie in [0, 1]");
  if (!(learning_rate > 0)) fail("learning rate must be > 0");
  if (batch_size < 1) fail("batch size must be >= 1");
  if (!(adagrad_epsilon > 0)) fail("adagrad epsilon must be > 0");
  if (init_std < 0) fail("init std must be >= 0");
  if (tolerance < 0) fail("tolerance must be >= 0");
}

double rescal_score(const RescalParams& params, const Triple& t) {
  return params.A.row(t.s).dot(params.R[t.p] * params.A.row(t.o).transpose());
}

double transe_score(const TransEParams& params, const Triple& t) {
  const Vector diff =
      (params.A.row(t.s) + params.relations.row(t.p) - params.A.row(t.o)).transpose();
  return params.distance == Distance::l1 ? -diff.lpNorm<1>() : -diff.norm();
}

double mwnn_score(const MwnnParams& params, const Triple& t, const Matrix* weight_mask) {
  const Eigen::Index d = params.A.cols();
  Vector x(3 * d);
  x << params.A.row(t.s).transpose(), params.relations.row(t.p).transpose(),
      params.A.row(t.o).transpose();
  Vector z;
  if (weight_mask) {
    z = params.W.cwiseProduct(*weight_mask) * x;
  } else {
    z = params.keep_probability * (params.W * x);
  }
  const double u = params.beta.dot(z.array().tanh().matrix());
  return 1.0 / (1.0 + std::exp(-u));
}

void normalize_rows(Matrix& A, std::span<const EntityId> rows) {
  std::size_t zero_rows = 0;
  auto fix = [&](Eigen::Index r) {
    const double norm = A.row(r).norm();
    if (norm > 0) {
      A.row(r) /= norm;
    } else {
      ++zero_rows;
    }
  };
  if (rows.empty()) {
    for (Eigen::Index r = 0; r < A.rows(); ++r) fix(r);
  } else {
    for (EntityId r : rows) fix(static_cast<Eigen::Index>(r));
  }
  if (zero_rows > 0) log::warn("normalize: left {} zero rows unchanged", zero_rows);
}

namespace {

Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = stddev * dist(rng);
  }
  return out;
}

}  // namespace

ModelParams init_params(ModelKind kind, std::size_t num_entities, std::size_t num_relations,
                        const Hyperparams& hp) {
  if (num_entities < 1 || num_relations < 1 || hp.dim < 1) {
    throw ConfigError("init_params requires n, m, d >= 1");
  }
  const auto n = static_cast<Eigen::Index>(num_entities);
  const auto m = static_cast<Eigen::Index>(num_relations);
  const auto d = static_cast<Eigen::Index>(hp.dim);
  Rng rng(hp.seed);
  switch (kind) {
    case ModelKind::rescal: {
      RescalParams p;
      p.A = normal_matrix(n, d, hp.init_std, rng);
      p.R.reserve(num_relations);
      for (Eigen::Index k = 0; k < m; ++k) p.R.push_back(normal_matrix(d, d, hp.init_std, rng));
      return p;
    }
    case ModelKind::transe: {
      TransEParams p;
      p.A = normal_matrix(n, d, hp.init_std, rng);
      p.relations = normal_matrix(m, d, hp.init_std, rng);
      p.distance = hp.distance;
      normalize_rows(p.A);
      return p;
    }
    case ModelKind::mwnn: {
      const auto h = static_cast<Eigen::Index>(hp.hidden_width());
      MwnnParams p;
      p.A = normal_matrix(n, d, hp.init_std, rng);
      p.relations = normal_matrix(m, d, hp.init_std, rng);
      p.W = normal_matrix(h, 3 * d, hp.init_std, rng);
      p.beta = normal_matrix(h, 1, hp.init_std, rng);
      p.keep_probability = 1.0 - hp.dropconnect;
      return p;
    }
  }
  throw ConfigError("unknown model kind");
}

}  // namespace kgtc
