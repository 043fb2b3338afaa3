#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kgtc/graph.hpp"
#include "kgtc/models.hpp"
#include "kgtc/sampling.hpp"

namespace kgtc {

struct ScoredExample {
  Triple triple;
  double score = 0.0;
  bool positive = false;
};

/// Average precision. Examples with equal scores form one threshold, so a
/// tied block contributes its pooled precision (P / N when everything ties).
/// Throws UndefinedMetricError without both positives and negatives.
double auprc(std::span<const ScoredExample> scored);

/// Probability that a random positive outscores a random negative, ties
/// counting one half.
double auroc(std::span<const ScoredExample> scored);

/// Scores in input order. Throws ConfigError for ids outside the parameters.
std::vector<double> score_all(const ModelParams& params, std::span<const Triple> triples);

enum class SplitPart { validation, holdout, probe };

struct EvalReport {
  double auprc = 0.0;
  double auroc = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  std::string model;
  std::string regime;
  std::size_t dim = 0;
  std::uint64_t seed = 0;
  double wall_time_s = 0.0;
};

/// Scores the positives of `which` and its negative pool.
EvalReport evaluate(const ModelParams& params, const SplitBundle& split, SplitPart which,
                    Provenance regime, std::uint64_t seed);

/// AUPRC over explicit positive and negative lists.
double ranking_auprc(const ModelParams& params, std::span<const Triple> positives,
                     std::span<const Triple> negatives);

std::string to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);

/// Header and row of the comparison table: model,dataset,regime,d,auprc,auroc.
std::string comparison_csv_header();
std::string comparison_csv_row(const EvalReport& report, const std::string& dataset);

}  // namespace kgtc
