#pragma once
// Welch-style cross-spectra per class: Hann-windowed segments, 50% overlap,
// channel x channel outer products averaged over windows and trials.

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "mibci/types.hpp"

namespace mibci {

struct CrossSpectrumSet {
  std::vector<double> frequencies_hz;
  // [class][bin] -> Hermitian channel x channel matrix
  std::vector<std::vector<Eigen::MatrixXcd>> v;  // v[0] = rest, v[1] = task
  std::size_t n_trials[2]{0, 0};

  std::size_t n_bins() const { return frequencies_hz.size(); }
};

// resolution_hz sets the window length (fs / resolution samples).
// Bins are restricted to [band_lo, band_hi].
inline CrossSpectrumSet cross_spectra(const EpochSet& epochs, double resolution_hz = 1.0,
                                      double band_lo_hz = 6.0, double band_hi_hz = 32.0) {
  epochs.validate();
  const double fs = epochs.sample_rate_hz;
  const std::size_t n_win = static_cast<std::size_t>(std::lround(fs / resolution_hz));
  const std::size_t n_ch = epochs.n_channels();
  if (epochs.n_samples() < n_win)
    throw std::invalid_argument("cross_spectra: epoch shorter than one window");

  CrossSpectrumSet cs;
  for (std::size_t k = 0; k <= n_win / 2; ++k) {
    const double f = k * fs / static_cast<double>(n_win);
    if (f >= band_lo_hz && f <= band_hi_hz) cs.frequencies_hz.push_back(f);
  }
  const std::size_t n_bins = cs.frequencies_hz.size();
  cs.v.assign(2, std::vector<Eigen::MatrixXcd>(n_bins, Eigen::MatrixXcd::Zero(n_ch, n_ch)));

  Eigen::VectorXd hann(n_win);
  for (std::size_t i = 0; i < n_win; ++i)
    hann[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / (n_win - 1)));

  // DFT evaluated only at the retained bins
  Eigen::MatrixXcd dft(n_bins, n_win);
  for (std::size_t bi = 0; bi < n_bins; ++bi) {
    const double k = cs.frequencies_hz[bi] * n_win / fs;
    for (std::size_t t = 0; t < n_win; ++t)
      dft(bi, t) = hann[t] * std::exp(std::complex<double>(
                                 0.0, -2.0 * std::numbers::pi * k * t / n_win));
  }

  const std::size_t hop = n_win / 2;
  std::size_t n_windows[2] = {0, 0};
  for (std::size_t trial = 0; trial < epochs.n_trials(); ++trial) {
    const int c = epochs.labels[trial] == kLabelTask ? 1 : 0;
    ++cs.n_trials[c];
    const Eigen::MatrixXd& x = epochs.data[trial];
    for (std::size_t start = 0; start + n_win <= epochs.n_samples(); start += hop) {
      // spectra[bin] = per-channel Fourier coefficient at that bin
      const Eigen::MatrixXcd spectra =
          dft * x.middleCols(start, n_win).transpose().cast<std::complex<double>>();
      for (std::size_t bi = 0; bi < n_bins; ++bi) {
        const Eigen::VectorXcd xf = spectra.row(bi).transpose();
        cs.v[c][bi].noalias() += xf * xf.adjoint();
      }
      ++n_windows[c];
    }
  }
  for (int c = 0; c < 2; ++c) {
    if (n_windows[c] == 0) continue;
    for (auto& m : cs.v[c]) {
      m /= static_cast<double>(n_windows[c]);
      m = 0.5 * (m + m.adjoint().eval());  // enforce Hermitian symmetry
    }
  }
  return cs;
}

}  // namespace mibci
