#pragma once
// Source Power Comodulation: spatial filters whose component power
// covaries with a per-trial target. Two-class labels become z-scored ±1.

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "mibci/linalg.hpp"
#include "mibci/spatial.hpp"

namespace mibci {

// Solves the (C_z, C_mean) pencil where C_z = mean_e z(e) C(e).
// n_components/2 eigenvectors are taken from each spectral end.
inline SpatialModel train_spoc(const EpochSet& epochs, int n_components = 6,
                               bool normalize_trace = true) {
  epochs.validate();
  if (n_components < 2 || n_components % 2 != 0)
    throw std::invalid_argument("train_spoc: n_components must be even and >= 2");
  const std::size_t n_ch = epochs.n_channels();
  if (static_cast<std::size_t>(n_components) > n_ch)
    throw std::invalid_argument("train_spoc: n_components exceeds channel count");
  const std::size_t n_trials = epochs.n_trials();
  if (epochs.count_label(kLabelTask) < 2 || epochs.count_label(kLabelRest) < 2)
    throw std::invalid_argument("train_spoc: need >= 2 trials per class");

  // z-score the binary labels across trials
  Eigen::VectorXd z(n_trials);
  for (std::size_t t = 0; t < n_trials; ++t) z[t] = epochs.labels[t] == kLabelTask ? 1.0 : 0.0;
  const double mean = z.mean();
  const double sd = std::sqrt((z.array() - mean).square().sum() / (n_trials - 1));
  if (!(sd > 0.0)) throw std::invalid_argument("train_spoc: zero label variance");
  z = (z.array() - mean) / sd;

  Covariance cz{Eigen::MatrixXd::Zero(n_ch, n_ch), 0};
  Covariance cmean{Eigen::MatrixXd::Zero(n_ch, n_ch), 0};
  for (std::size_t t = 0; t < n_trials; ++t) {
    const Covariance ct = covariance(epochs.data[t], normalize_trace);
    cz.matrix += z[t] * ct.matrix;
    cmean.matrix += ct.matrix;
    cz.n_observations += ct.n_observations;
    cmean.n_observations += ct.n_observations;
  }
  cz.matrix /= static_cast<double>(n_trials);
  cmean.matrix /= static_cast<double>(n_trials);

  const EigenBasis eig = generalized_eig_sym(cz, cmean);

  SpatialModel model;
  model.method = SpatialMethod::spoc;
  model.n_pairs = n_components / 2;
  SpatialBand band;
  band.filters = detail::spectral_ends(eig.eigenvectors, n_components / 2, n_components / 2);
  band.eigenvalues = detail::spectral_ends(eig.eigenvalues, n_components / 2, n_components / 2);
  band.patterns = detail::patterns_from_filters(cmean.matrix, band.filters);
  detail::fix_signs(band.filters, band.patterns);
  model.bands.push_back(std::move(band));
  return model;
}

}  // namespace mibci
