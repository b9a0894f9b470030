#pragma once
// Spectrally weighted CSP: alternating optimization between spatial filters
// and per-frequency weights over the cross-spectrum bins.

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "mibci/linalg.hpp"
#include "mibci/spatial.hpp"
#include "mibci/spectrum.hpp"

namespace mibci {

namespace detail {

inline Covariance weighted_cov(const CrossSpectrumSet& cs, int cls,
                               const Eigen::VectorXd& beta) {
  const Eigen::Index d = cs.v[cls][0].rows();
  Covariance c{Eigen::MatrixXd::Zero(d, d), cs.n_trials[cls]};
  for (std::size_t bi = 0; bi < cs.n_bins(); ++bi)
    c.matrix += beta[static_cast<Eigen::Index>(bi)] * cs.v[cls][bi].real();
  c.matrix = 0.5 * (c.matrix + c.matrix.transpose().eval());
  return c;
}

}  // namespace detail

// Each component slot keeps its own spectral weight vector beta. Per
// iteration: solve the CSP pencil under that component's weighted
// covariances, pick the eigenvector at the slot's rank, then update
//   beta(w) ∝ s_fav(w)^p * (s_fav(w)/s_other(w))^q
// where s_c(w) = w^T Re V_c(w) w and the favored class is task for the
// top-end slots, rest for the bottom-end slots. Weights normalize to sum 1.
inline SpatialModel train_speccsp(const EpochSet& epochs, int n_pairs = 3, double p = 0.0,
                                  double q = 1.0, int n_iterations = 3,
                                  double resolution_hz = 1.0, double band_lo_hz = 6.0,
                                  double band_hi_hz = 32.0) {
  epochs.validate();
  if (n_pairs < 1) throw std::invalid_argument("train_speccsp: n_pairs must be >= 1");
  if (static_cast<std::size_t>(2 * n_pairs) > epochs.n_channels())
    throw std::invalid_argument("train_speccsp: n_pairs too large for channel count");
  if (n_iterations < 1) throw std::invalid_argument("train_speccsp: need >= 1 iteration");

  const CrossSpectrumSet cs = cross_spectra(epochs, resolution_hz, band_lo_hz, band_hi_hz);
  const Eigen::Index n_bins = static_cast<Eigen::Index>(cs.n_bins());
  const int n_comp = 2 * n_pairs;
  const std::size_t n_ch = epochs.n_channels();

  Eigen::MatrixXd beta =
      Eigen::MatrixXd::Constant(n_bins, n_comp, 1.0 / static_cast<double>(n_bins));
  Eigen::MatrixXd w(n_ch, n_comp);
  Eigen::VectorXd lambdas(n_comp);

  for (int iter = 0; iter < n_iterations; ++iter) {
    for (int j = 0; j < n_comp; ++j) {
      const Covariance c_task = detail::weighted_cov(cs, 1, beta.col(j));
      const Covariance c_rest = detail::weighted_cov(cs, 0, beta.col(j));
      const Covariance composite{c_task.matrix + c_rest.matrix,
                                 c_task.n_observations + c_rest.n_observations};
      const EigenBasis eig = generalized_eig_sym(c_task, composite);

      // slot j < n_pairs tracks the j-th largest eigenvalue, the rest track
      // the bottom end (task-variance-minimizing components)
      const bool top_end = j < n_pairs;
      const Eigen::Index col = top_end ? j : eig.eigenvectors.cols() - (n_comp - j);
      w.col(j) = eig.eigenvectors.col(col);
      lambdas[j] = eig.eigenvalues[col];

      Eigen::VectorXd next(n_bins);
      for (Eigen::Index bi = 0; bi < n_bins; ++bi) {
        const double s_task =
            (w.col(j).transpose() * cs.v[1][bi].real() * w.col(j)).value();
        const double s_rest =
            (w.col(j).transpose() * cs.v[0][bi].real() * w.col(j)).value();
        const double s_fav = top_end ? s_task : s_rest;
        const double s_other = top_end ? s_rest : s_task;
        next[bi] = std::pow(s_fav, p) * std::pow(s_fav / s_other, q);
        if (!std::isfinite(next[bi]))
          throw std::runtime_error("train_speccsp: non-finite spectral weight at " +
                                   std::to_string(cs.frequencies_hz[bi]) + " Hz");
      }
      const double total = next.sum();
      if (!(total > 0.0) || !std::isfinite(total))
        throw std::runtime_error("train_speccsp: degenerate spectral weights");
      beta.col(j) = next / total;
    }
  }

  SpatialModel model;
  model.method = SpatialMethod::speccsp;
  model.n_pairs = n_pairs;
  model.spectral_freqs_hz = cs.frequencies_hz;
  model.spectral_weights = beta;

  // Patterns from the broadband composite covariance of the raw epochs.
  const auto c = detail::class_covariances(epochs);
  SpatialBand band;
  band.filters = w;
  band.eigenvalues = lambdas;
  band.patterns = detail::patterns_from_filters(c[0].matrix + c[1].matrix, band.filters);
  detail::fix_signs(band.filters, band.patterns);
  model.bands.push_back(std::move(band));
  return model;
}

}  // namespace mibci
