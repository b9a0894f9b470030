#pragma once
// Core data model: continuous recordings, cue markers, and epoched trials.

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mibci {

struct Marker {
  std::size_t sample_index{0};
  std::string label;
};

// Continuous multichannel EEG. Samples are channel-major (rows = channels),
// values in microvolts.
struct Recording {
  std::vector<std::string> channel_labels;
  double sample_rate_hz{0.0};
  Eigen::MatrixXd samples;  // channel x time
  std::vector<Marker> markers;

  std::size_t n_channels() const { return static_cast<std::size_t>(samples.rows()); }
  std::size_t n_samples() const { return static_cast<std::size_t>(samples.cols()); }
  double duration_s() const { return n_samples() / sample_rate_hz; }

  void validate() const {
    if (samples.rows() < 1)
      throw std::invalid_argument("Recording: need at least one channel");
    if (channel_labels.size() != n_channels())
      throw std::invalid_argument("Recording: channel label count does not match sample rows");
    if (!(sample_rate_hz > 0.0))
      throw std::invalid_argument("Recording: sample_rate_hz must be positive");
    std::size_t prev = 0;
    bool first = true;
    for (const auto& m : markers) {
      if (m.sample_index >= n_samples())
        throw std::invalid_argument("Recording: marker out of range");
      if (!first && m.sample_index < prev)
        throw std::invalid_argument("Recording: markers not sorted by sample index");
      prev = m.sample_index;
      first = false;
    }
  }
};

// Trial labels: task = 1, rest = 0.
inline constexpr int kLabelTask = 1;
inline constexpr int kLabelRest = 0;

// Fixed-length labeled trials in chronological order.
struct EpochSet {
  std::vector<Eigen::MatrixXd> data;  // trial -> channel x sample
  std::vector<int> labels;
  std::vector<std::size_t> trial_order;  // chronological rank of each trial
  std::pair<double, double> epoch_window_s{0.0, 0.0};
  double sample_rate_hz{0.0};

  std::size_t n_trials() const { return data.size(); }
  std::size_t n_channels() const { return data.empty() ? 0 : static_cast<std::size_t>(data[0].rows()); }
  std::size_t n_samples() const { return data.empty() ? 0 : static_cast<std::size_t>(data[0].cols()); }

  std::size_t count_label(int label) const {
    std::size_t n = 0;
    for (int l : labels) n += (l == label);
    return n;
  }

  void validate() const {
    if (labels.size() != data.size())
      throw std::invalid_argument("EpochSet: label count does not match trial count");
    if (trial_order.size() != data.size())
      throw std::invalid_argument("EpochSet: trial_order length does not match trial count");
    for (const auto& t : data)
      if (t.rows() != data[0].rows() || t.cols() != data[0].cols())
        throw std::invalid_argument("EpochSet: trials differ in shape");
  }

  // Subset by trial indices, preserving order of `idx`.
  EpochSet subset(const std::vector<std::size_t>& idx) const {
    EpochSet out;
    out.epoch_window_s = epoch_window_s;
    out.sample_rate_hz = sample_rate_hz;
    out.data.reserve(idx.size());
    for (std::size_t i : idx) {
      if (i >= data.size()) throw std::out_of_range("EpochSet::subset: index out of range");
      out.data.push_back(data[i]);
      out.labels.push_back(labels[i]);
      out.trial_order.push_back(trial_order[i]);
    }
    return out;
  }
};

}  // namespace mibci
