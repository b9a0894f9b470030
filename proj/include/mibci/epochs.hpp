#pragma once
// Epoch extraction: one task epoch and one pre-cue rest epoch per cue,
// interleaved in chronological order.

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "mibci/types.hpp"

namespace mibci {

struct EpochExtraction {
  EpochSet epochs;
  std::size_t skipped_cues{0};  // cues too close to a recording edge
};

inline EpochExtraction extract_epochs(const Recording& rec, const std::string& cue_label,
                                      std::pair<double, double> task_window_s = {0.5, 3.5},
                                      std::pair<double, double> rest_window_s = {-2.5, -0.5}) {
  rec.validate();
  const double fs = rec.sample_rate_hz;
  const auto window_samples = [&](std::pair<double, double> w) {
    const long start = std::lround(w.first * fs);
    const long stop = std::lround(w.second * fs);
    return std::pair<long, long>{start, stop};
  };
  const auto [task_lo, task_hi] = window_samples(task_window_s);
  const auto [rest_lo, rest_hi] = window_samples(rest_window_s);
  const long task_len = task_hi - task_lo;
  const long rest_len = rest_hi - rest_lo;
  if (task_len <= 0 || rest_len <= 0)
    throw std::invalid_argument("extract_epochs: empty window");

  EpochExtraction out;
  EpochSet& ep = out.epochs;
  ep.sample_rate_hz = fs;
  ep.epoch_window_s = task_window_s;
  const long n = static_cast<long>(rec.n_samples());

  // Per cue, windows emitted in order of their start sample (pre-cue rest
  // first with the defaults) so trials stay chronological.
  struct Pending {
    long start, len;
    int label;
  };
  for (const auto& m : rec.markers) {
    if (m.label != cue_label) continue;
    const long cue = static_cast<long>(m.sample_index);
    Pending wins[2] = {{cue + rest_lo, rest_len, kLabelRest},
                       {cue + task_lo, task_len, kLabelTask}};
    if (wins[0].start > wins[1].start) std::swap(wins[0], wins[1]);
    bool usable = true;
    for (const auto& w : wins)
      if (w.start < 0 || w.start + w.len > n) usable = false;
    if (!usable) {
      ++out.skipped_cues;
      continue;
    }
    for (const auto& w : wins) {
      ep.data.push_back(rec.samples.middleCols(w.start, w.len));
      ep.labels.push_back(w.label);
      ep.trial_order.push_back(ep.trial_order.size());
    }
  }
  // Common length: truncate to the shorter window if they differ.
  if (!ep.data.empty()) {
    long min_len = task_len < rest_len ? task_len : rest_len;
    for (auto& t : ep.data)
      if (t.cols() > min_len) t = t.leftCols(min_len).eval();
  }
  if (ep.data.empty()) throw std::runtime_error("extract_epochs: zero usable cues");
  ep.validate();
  return out;
}

}  // namespace mibci
