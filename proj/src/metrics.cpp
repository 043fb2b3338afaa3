#include "kgtc/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include <fmt/core.h>
#include <nlohmann/json.hpp>

#include "kgtc/error.hpp"

namespace kgtc {
namespace {

struct Counts {
  std::size_t pos = 0;
  std::size_t neg = 0;
};

Counts count_labels(std::span<const ScoredExample> scored) {
  Counts c;
  for (const auto& ex : scored) {
    if (!std::isfinite(ex.score)) throw UndefinedMetricError("non-finite score");
    (ex.positive ? c.pos : c.neg) += 1;
  }
  if (c.pos == 0 || c.neg == 0) {
    throw UndefinedMetricError(
        fmt::format("metric needs positives and negatives (got {} and {})", c.pos, c.neg));
  }
  return c;
}

std::vector<std::size_t> order_by_score(std::span<const ScoredExample> scored, bool descending) {
  std::vector<std::size_t> order(scored.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return descending ? scored[a].score > scored[b].score : scored[a].score < scored[b].score;
  });
  return order;
}

}  // namespace

double auprc(std::span<const ScoredExample> scored) {
  const Counts counts = count_labels(scored);
  const auto order = order_by_score(scored, /*descending=*/true);
  double ap = 0.0;
  std::size_t tp = 0, seen = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t group_pos = 0, j = i;
    for (; j < order.size() && scored[order[j]].score == scored[order[i]].score; ++j) {
      if (scored[order[j]].positive) ++group_pos;
    }
    tp += group_pos;
    seen += j - i;
    if (group_pos > 0) {
      ap += (static_cast<double>(group_pos) / counts.pos) * (static_cast<double>(tp) / seen);
    }
    i = j;
  }
  return ap;
}

double auroc(std::span<const ScoredExample> scored) {
  const Counts counts = count_labels(scored);
  const auto order = order_by_score(scored, /*descending=*/false);
  // Twice the Mann-Whitney U statistic, kept integral so the result is exact.
  std::uint64_t twice_rank_sum = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t group_pos = 0, j = i;
    for (; j < order.size() && scored[order[j]].score == scored[order[i]].score; ++j) {
      if (scored[order[j]].positive) ++group_pos;
    }
    // Ranks i+1 .. j share the midrank (i + 1 + j) / 2.
    twice_rank_sum += group_pos * (i + 1 + j);
    i = j;
  }
  const std::uint64_t twice_u = twice_rank_sum - std::uint64_t{counts.pos} * (counts.pos + 1);
  return static_cast<double>(twice_u) / (2.0 * static_cast<double>(counts.pos) * counts.neg);
}

std::vector<double> score_all(const ModelParams& params, std::span<const Triple> triples) {
  const std::size_t n = num_entities(params);
  const std::size_t m = num_relations(params);
  for (const Triple& t : triples) {
    if (t.s >= n || t.o >= n || t.p >= m) {
      throw ConfigError(fmt::format("triple ({}, {}, {}) does not fit a model of {} entities and {} relations",
                                    t.s, t.p, t.o, n, m));
    }
  }
  std::vector<double> out(triples.size());
  struct {
    const Triple* t;
    double operator()(const RescalParams& p) const { return rescal_score(p, *t); }
    double operator()(const TransEParams& p) const { return transe_score(p, *t); }
    double operator()(const MwnnParams& p) const { return mwnn_score(p, *t); }
  } scorer{nullptr};
  for (std::size_t i = 0; i < triples.size(); ++i) {
    scorer.t = &triples[i];
    out[i] = std::visit(scorer, params);
  }
  return out;
}

double ranking_auprc(const ModelParams& params, std::span<const Triple> positives,
                     std::span<const Triple> negatives) {
  std::vector<ScoredExample> scored;
  scored.reserve(positives.size() + negatives.size());
  const auto pos_scores = score_all(params, positives);
  const auto neg_scores = score_all(params, negatives);
  for (std::size_t i = 0; i < positives.size(); ++i) scored.push_back({positives[i], pos_scores[i], true});
  for (std::size_t i = 0; i < negatives.size(); ++i) scored.push_back({negatives[i], neg_scores[i], false});
  return auprc(scored);
}

EvalReport evaluate(const ModelParams& params, const SplitBundle& split, SplitPart which,
                    Provenance regime, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<Triple>* positives = &split.holdout;
  const std::vector<Triple>* negatives = &split.holdout_negatives;
  if (which == SplitPart::validation) {
    positives = &split.validation;
    negatives = &split.validation_negatives;
  } else if (which == SplitPart::probe) {
    positives = &split.early_stop_probe;
    negatives = &split.probe_negatives;
  }
  if (negatives->empty()) throw UndefinedMetricError("split has no negatives for the requested part");

  std::vector<ScoredExample> scored;
  scored.reserve(positives->size() + negatives->size());
  const auto pos_scores = score_all(params, *positives);
  const auto neg_scores = score_all(params, *negatives);
  for (std::size_t i = 0; i < positives->size(); ++i) scored.push_back({(*positives)[i], pos_scores[i], true});
  for (std::size_t i = 0; i < negatives->size(); ++i) scored.push_back({(*negatives)[i], neg_scores[i], false});

  EvalReport report;
  report.auprc = auprc(scored);
  report.auroc = auroc(scored);
  report.n_pos = positives->size();
  report.n_neg = negatives->size();
  report.model = std::string(to_string(kind_of(params)));
  report.regime = std::string(to_string(regime));
  report.dim = dim_of(params);
  report.seed = seed;
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::string to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["auprc"] = r.auprc;
  j["auroc"] = r.auroc;
  j["model"] = r.model;
  j["regime"] = r.regime;
  j["dim"] = r.dim;
  j["seed"] = r.seed;
  j["n_pos"] = r.n_pos;
  j["n_neg"] = r.n_neg;
  j["wall_time_s"] = r.wall_time_s;
  return j.dump(2);
}

EvalReport report_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  EvalReport r;
  r.auprc = j.at("auprc").get<double>();
  r.auroc = j.at("auroc").get<double>();
  r.model = j.at("model").get<std::string>();
  r.regime = j.at("regime").get<std::string>();
  r.dim = j.at("dim").get<std::size_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.n_pos = j.at("n_pos").get<std::size_t>();
  r.n_neg = j.at("n_neg").get<std::size_t>();
  r.wall_time_s = j.at("wall_time_s").get<double>();
  return r;
}

std::string comparison_csv_header() { return "model,dataset,regime,d,auprc,auroc"; }

std::string comparison_csv_row(const EvalReport& r, const std::string& dataset) {
  return fmt::format("{},{},{},{},{:.6f},{:.6f}", r.model, dataset, r.regime, r.dim, r.auprc, r.auroc);
}

}  // namespace kgtc
