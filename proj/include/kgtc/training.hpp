#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "kgtc/models.hpp"

namespace kgtc {

/// One row of the CSV training log. Epoch 0 describes the initial parameters.
struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0.0;
  double probe_auprc = 0.0;
  double wall_time_s = 0.0;
};

struct TrainingLog {
  std::vector<EpochRecord> records;
  std::size_t best_epoch = 0;
  bool stopped_early = false;
};

std::string training_log_csv(const TrainingLog& log);

/// Stops after `patience` consecutive epochs whose probe AUPRC fails to beat
/// the best value so far by more than `tolerance`.
class EarlyStopping {
 public:
  EarlyStopping(double tolerance, std::size_t patience) : tolerance_(tolerance), patience_(patience) {}

  struct Verdict {
    bool new_best = false;
    bool stop = false;
  };

  Verdict observe(double auprc);
  double best() const { return best_; }

 private:
  double tolerance_;
  std::size_t patience_;
  double best_ = -std::numeric_limits<double>::infinity();
  std::size_t stale_ = 0;
};

struct FitResult {
  ModelParams params;
  TrainingLog log;
};

}  // namespace kgtc
