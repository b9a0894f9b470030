#pragma once
// Forward-model synthetic EEG: band-limited oscillatory sources mixed into
// sensors with pink background noise. Task epochs attenuate each
// task-relevant source by (1 - modulation) — an ERD-style power drop.
// Fully determined by the seed, with exact ground truth available.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "mibci/iir.hpp"
#include "mibci/types.hpp"

namespace mibci {

struct SynthSource {
  double center_hz{11.0};
  double bandwidth_hz{2.0};
  double modulation{0.8};  // depth m in [0,1]; task amplitude scales by (1-m)
};

struct SynthSpec {
  int n_channels{11};
  std::vector<SynthSource> sources{SynthSource{}};
  double snr_db{5.0};  // source-to-pink-noise sensor power ratio
  int n_trials{40};    // cues; epoching yields one task + one rest trial each
  double task_s{4.0};
  double iti_s{4.0};
  double fs_hz{256.0};
  std::uint64_t seed{1};
  std::optional<Eigen::MatrixXd> mixing;  // channel x source; random if absent

  void validate() const {
    if (n_channels < 1) throw std::invalid_argument("synth: n_channels must be >= 1");
    if (sources.empty()) throw std::invalid_argument("synth: need at least one source");
    for (const auto& s : sources) {
      if (s.modulation < 0.0 || s.modulation > 1.0)
        throw std::invalid_argument("synth: modulation must be in [0,1]");
      if (fs_hz <= 2.0 * (s.center_hz + s.bandwidth_hz))
        throw std::invalid_argument("synth: fs too low for source band");
    }
    if (n_trials < 1) throw std::invalid_argument("synth: n_trials must be >= 1");
    if (task_s <= 0.0 || iti_s <= 0.0) throw std::invalid_argument("synth: bad durations");
    if (mixing && (mixing->rows() != n_channels ||
                   mixing->cols() != static_cast<Eigen::Index>(sources.size())))
      throw std::invalid_argument("synth: mixing matrix shape mismatch");
  }
};

struct SynthGroundTruth {
  Eigen::MatrixXd mixing;  // channel x source
  // Realized source variance per epoch, in the chronological epoch order
  // produced by extract_epochs (rest then task per cue).
  Eigen::MatrixXd epoch_source_power;  // epoch x source
  std::vector<int> epoch_labels;
  std::vector<std::size_t> cue_samples;
};

inline constexpr int kSourceShapingOrder = 6;

namespace detail {

// Random mixing with clamped singular values (condition number <= 2).
// Drawn from a fixed internal seed so the montage geometry is identical
// across sessions; only the realized signals depend on the spec seed.
inline Eigen::MatrixXd random_mixing(int n_ch, int n_src) {
  std::mt19937_64 rng(0x6d696263u);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(n_ch, n_src);
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = normal(rng);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(g, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd sv = svd.singularValues();
  for (Eigen::Index i = 0; i < sv.size(); ++i) sv[i] = std::clamp(sv[i], 1.0, 2.0);
  return svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose();
}

// Three-pole pink noise approximation fed by white Gaussian samples.
inline Eigen::VectorXd pink_noise(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd out(n);
  double b0 = 0.0, b1 = 0.0, b2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = normal(rng);
    b0 = 0.99765 * b0 + w * 0.0990460;
    b1 = 0.96300 * b1 + w * 0.2965164;
    b2 = 0.57000 * b2 + w * 1.0526913;
    out[static_cast<Eigen::Index>(i)] = b0 + b1 + b2 + w * 0.1848;
  }
  return out;
}

}  // namespace detail

struct SynthSession {
  Recording recording;
  SynthGroundTruth truth;
};

inline SynthSession generate_session_with_truth(
    const SynthSpec& spec, std::pair<double, double> task_window_s = {0.5, 3.5},
    std::pair<double, double> rest_window_s = {-2.5, -0.5}) {
  spec.validate();
  const double fs = spec.fs_hz;
  const std::size_t n_task = static_cast<std::size_t>(std::lround(spec.task_s * fs));
  const std::size_t n_iti = static_cast<std::size_t>(std::lround(spec.iti_s * fs));
  const std::size_t n_total =
      n_iti + spec.n_trials * (n_task + n_iti) + static_cast<std::size_t>(fs);
  const std::size_t n_src = spec.sources.size();

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  SynthSession out;
  SynthGroundTruth& gt = out.truth;
  gt.mixing = spec.mixing ? *spec.mixing
                          : detail::random_mixing(spec.n_channels, static_cast<int>(n_src));

  // cue = start of each task segment
  for (int t = 0; t < spec.n_trials; ++t)
    gt.cue_samples.push_back(n_iti + t * (n_task + n_iti));

  // Band-limited unit-variance sources, then the per-epoch ERD envelope.
  Eigen::MatrixXd sources(n_src, n_total);
  for (std::size_t s = 0; s < n_src; ++s) {
    const SynthSource& src = spec.sources[s];
    Eigen::VectorXd x(n_total);
    for (std::size_t i = 0; i < n_total; ++i) x[static_cast<Eigen::Index>(i)] = normal(rng);
    // Steep shaping keeps the source genuinely band-limited; a low-order
    // filter would leak enough skirt power to blur per-band contrasts.
    const IirFilter bp = design_butterworth_bandpass(
        kSourceShapingOrder, src.center_hz - src.bandwidth_hz / 2.0,
        src.center_hz + src.bandwidth_hz / 2.0, fs);
    filter_forward_inplace(bp, x);
    const double sd = std::sqrt((x.array() - x.mean()).square().sum() / (n_total - 1));
    x /= sd;
    for (std::size_t cue : gt.cue_samples)
      x.segment(static_cast<Eigen::Index>(cue), n_task) *= 1.0 - src.modulation;
    sources.row(static_cast<Eigen::Index>(s)) = x.transpose();
  }

  // Realized per-epoch source power in extract_epochs order (rest, task).
  const long t_lo = std::lround(task_window_s.first * fs);
  const long t_len = std::lround((task_window_s.second - task_window_s.first) * fs);
  const long r_lo = std::lround(rest_window_s.first * fs);
  const long r_len = std::lround((rest_window_s.second - rest_window_s.first) * fs);
  gt.epoch_source_power.resize(2 * spec.n_trials, static_cast<Eigen::Index>(n_src));
  Eigen::Index row = 0;
  for (std::size_t cue : gt.cue_samples) {
    const long windows[2][2] = {{static_cast<long>(cue) + r_lo, r_len},
                                 {static_cast<long>(cue) + t_lo, t_len}};
    const int window_labels[2] = {kLabelRest, kLabelTask};
    for (int wi = 0; wi < 2; ++wi) {
      for (std::size_t s = 0; s < n_src; ++s) {
        const auto seg = sources.row(static_cast<Eigen::Index>(s))
                             .segment(windows[wi][0], windows[wi][1]);
        gt.epoch_source_power(row, static_cast<Eigen::Index>(s)) =
            (seg.array() - seg.mean()).square().sum() / (windows[wi][1] - 1);
      }
      gt.epoch_labels.push_back(window_labels[wi]);
      ++row;
    }
  }

  // Mix into sensors and add pink noise at the requested SNR.
  Recording& rec = out.recording;
  rec.sample_rate_hz = fs;
  rec.samples = gt.mixing * sources;
  const double signal_power = rec.samples.array().square().mean();
  const double noise_power = signal_power / std::pow(10.0, spec.snr_db / 10.0);
  for (int ch = 0; ch < spec.n_channels; ++ch) {
    Eigen::VectorXd pink = detail::pink_noise(n_total, rng);
    const double sd = std::sqrt((pink.array() - pink.mean()).square().sum() / (n_total - 1));
    rec.samples.row(ch) += (std::sqrt(noise_power) / sd) * pink.transpose();
  }

  static const char* kMontage[11] = {"F3", "Fz", "F4", "T3", "C3", "Cz",
                                     "C4", "T4", "P3", "Pz", "P4"};
  for (int ch = 0; ch < spec.n_channels; ++ch)
    rec.channel_labels.push_back(ch < 11 ? kMontage[ch] : "ch" + std::to_string(ch));
  for (std::size_t cue : gt.cue_samples) rec.markers.push_back({cue, "start"});
  rec.validate();
  return out;
}

inline Recording generate_session(const SynthSpec& spec) {
  return generate_session_with_truth(spec).recording;
}

inline SynthGroundTruth ground_truth(const SynthSpec& spec) {
  return generate_session_with_truth(spec).truth;
}

}  // namespace mibci
