#include "kgtc/training.hpp"

#include <fmt/core.h>

namespace kgtc {

std::string training_log_csv(const TrainingLog& log) {
  std::string out = "epoch,loss,probe_auprc,wall_time_s\n";
  for (const auto& r : log.records) {
    out += fmt::format("{},{:.12g},{:.12g},{:.6f}\n", r.epoch, r.loss, r.probe_auprc, r.wall_time_s);
  }
  return out;
}

EarlyStopping::Verdict EarlyStopping::observe(double auprc) {
  Verdict v;
  const bool improved = auprc > best_ + tolerance_;
  if (auprc > best_) {
    v.new_best = true;
    best_ = auprc;
  }
  stale_ = improved ? 0 : stale_ + 1;
  v.stop = stale_ >= patience_;
  return v;
}

}  // namespace kgtc
