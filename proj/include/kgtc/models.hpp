#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "kgtc/graph.hpp"

namespace kgtc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class ModelKind { rescal, transe, mwnn };
enum class Distance { l1, l2 };

std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view s);
std::string_view to_string(Distance d);
Distance distance_from_string(std::string_view s);

/// Bilinear model: entity rows of `A` and one d x d interaction matrix per relation.
struct RescalParams {
  Matrix A;
  std::vector<Matrix> R;

  std::size_t dim() const { return static_cast<std::size_t>(A.cols()); }
};

/// Translation model. Rows of `A` are kept at unit L2 norm by the trainer.
struct TransEParams {
  Matrix A;
  Matrix relations;  ///< m x d translation vectors
  Distance distance = Distance::l1;

  std::size_t dim() const { return static_cast<std::size_t>(A.cols()); }
};

/// Multiway network: sigmoid(beta' tanh(W [a_s; r_p; a_o])).
struct MwnnParams {
  Matrix A;
  Matrix relations;  ///< m x d
  Matrix W;          ///< h x 3d
  Vector beta;       ///< h
  /// Multiplies W when scoring without a DropConnect mask; 1 - p_drop after training.
  double keep_probability = 1.0;

  std::size_t dim() const { return static_cast<std::size_t>(A.cols()); }
  std::size_t hidden() const { return static_cast<std::size_t>(W.rows()); }
};

using ModelParams = std::variant<RescalParams, TransEParams, MwnnParams>;

ModelKind kind_of(const ModelParams& params);
std::size_t num_entities(const ModelParams& params);
std::size_t num_relations(const ModelParams& params);
std::size_t dim_of(const ModelParams& params);

struct Hyperparams {
  std::size_t dim = 10;
  // RESCAL
  double lambda_a = 0.0;
  double lambda_r = 0.0;
  // TransE
  double gamma = 1.0;
  Distance distance = Distance::l1;
  // mwNN
  std::size_t corruptions = 5;
  std::size_t hidden = 0;  ///< 0 means "same as dim"
  double l1 = 0.0;
  double l2 = 0.0;
  double dropconnect = 0.0;
  // SGD
  double learning_rate = 0.01;
  std::size_t batch_size = 128;
  double adagrad_epsilon = 1e-8;
  // Shared
  std::size_t max_epochs = 200;
  std::size_t patience = 3;       ///< ALS sweeps
  std::size_t sgd_patience = 10;  ///< SGD epochs
  double tolerance = 1e-4;
  double init_std = 0.1;
  std::uint64_t seed = 0;

  std::size_t hidden_width() const { return hidden == 0 ? dim : hidden; }
  /// Throws ConfigError when a bound is violated.
  void validate() const;
};

double rescal_score(const RescalParams& params, const Triple& t);
double transe_score(const TransEParams& params, const Triple& t);

/// With `weight_mask`, W is multiplied elementwise by the mask (DropConnect);
/// otherwise W is scaled by params.keep_probability.
double mwnn_score(const MwnnParams& params, const Triple& t, const Matrix* weight_mask = nullptr);

/// Draws every tensor from N(0, init_std^2) under hp.seed; TransE entity rows
/// are then projected onto the unit sphere.
ModelParams init_params(ModelKind kind, std::size_t num_entities, std::size_t num_relations,
                        const Hyperparams& hp);

/// Scales the listed rows of `A` (all rows if empty) to unit L2 norm. Zero
/// rows stay zero.
void normalize_rows(Matrix& A, std::span<const EntityId> rows = {});

}  // namespace kgtc
