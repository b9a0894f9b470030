#pragma once
// Log-variance feature extraction and shrinkage Fisher LDA.

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "mibci/linalg.hpp"
#include "mibci/spatial.hpp"

namespace mibci {

// Per trial, per band: project through W, take log of per-component sample
// variance, concatenate bands in band order. A zero-variance component is
// floored at log(1e-12); the return counts how often that happened.
struct LogVarFeatures {
  Eigen::MatrixXd values;  // trial x feature
  std::size_t floored{0};
};

inline LogVarFeatures features_logvar(const EpochSet& epochs, const SpatialModel& spatial) {
  epochs.validate();
  if (spatial.bands.empty()) throw std::invalid_argument("features_logvar: empty model");
  if (static_cast<Eigen::Index>(epochs.n_channels()) != spatial.bands[0].filters.rows())
    throw std::invalid_argument("features_logvar: channel count does not match filters");

  const std::size_t n_feat = spatial.n_components();
  LogVarFeatures out;
  out.values.resize(epochs.n_trials(), n_feat);
  constexpr double kFloor = 1e-12;

  for (std::size_t t = 0; t < epochs.n_trials(); ++t) {
    Eigen::Index col = 0;
    for (const auto& band : spatial.bands) {
      Eigen::MatrixXd x = epochs.data[t];
      if (band.filter) x = filter_forward(*band.filter, x);
      const Eigen::MatrixXd comps = band.filters.transpose() * x;
      for (Eigen::Index j = 0; j < comps.rows(); ++j) {
        const double m = comps.row(j).mean();
        double var = (comps.row(j).array() - m).square().sum() /
                     static_cast<double>(comps.cols() - 1);
        if (!(var > kFloor)) {
          var = kFloor;
          ++out.floored;
        }
        out.values(static_cast<Eigen::Index>(t), col++) = std::log(var);
      }
    }
  }
  return out;
}

struct LdaModel {
  Eigen::VectorXd weights;
  double bias{0.0};
  double shrinkage_gamma{0.0};

  double score(const Eigen::VectorXd& f) const { return weights.dot(f) + bias; }
  // class 1 iff score > 0; a tie goes to the rest class
  int predict(const Eigen::VectorXd& f) const { return score(f) > 0.0 ? 1 : 0; }
};

// Fisher LDA with shrinkage of the pooled within-class covariance.
// gamma_auto selects the Ledoit-Wolf intensity from the pooled centered
// features. A singular covariance at gamma = 0 falls back to auto.
inline LdaModel train_lda(const Eigen::MatrixXd& features, const std::vector<int>& labels,
                          double gamma = -1.0 /* auto */) {
  const Eigen::Index n = features.rows();
  const Eigen::Index d = features.cols();
  if (static_cast<std::size_t>(n) != labels.size())
    throw std::invalid_argument("train_lda: label count mismatch");
  if (d < 1) throw std::invalid_argument("train_lda: need at least one feature");

  Eigen::VectorXd mu[2] = {Eigen::VectorXd::Zero(d), Eigen::VectorXd::Zero(d)};
  std::size_t counts[2] = {0, 0};
  for (Eigen::Index i = 0; i < n; ++i) {
    const int c = labels[static_cast<std::size_t>(i)] == kLabelTask ? 1 : 0;
    mu[c] += features.row(i).transpose();
    ++counts[c];
  }
  if (counts[0] == 0 || counts[1] == 0)
    throw std::invalid_argument("train_lda: both classes required");
  mu[0] /= static_cast<double>(counts[0]);
  mu[1] /= static_cast<double>(counts[1]);

  // pooled within-class scatter from class-centered rows
  Eigen::MatrixXd centered(d, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int c = labels[static_cast<std::size_t>(i)] == kLabelTask ? 1 : 0;
    centered.col(i) = features.row(i).transpose() - mu[c];
  }
  Covariance s{centered * centered.transpose() / static_cast<double>(n - 1),
               static_cast<std::size_t>(n)};
  s.matrix = 0.5 * (s.matrix + s.matrix.transpose().eval());

  const bool want_auto = gamma < 0.0;
  double g = want_auto ? ledoit_wolf_gamma(centered) : gamma;
  if (g > 1.0) throw std::invalid_argument("train_lda: gamma must be in [0,1] or auto");

  auto solve = [&](double gg) -> LdaModel {
    const Covariance sh = shrink(s, gg);
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(sh.matrix);
    const Eigen::VectorXd dv = ldlt.vectorD();
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        dv.minCoeff() <= 1e-12 * dv.maxCoeff())
      throw std::runtime_error("singular pooled covariance");
    LdaModel m;
    m.weights = ldlt.solve(mu[1] - mu[0]);
    if (!m.weights.allFinite() || m.weights.norm() == 0.0)
      throw std::runtime_error("singular pooled covariance");
    m.bias = -m.weights.dot(0.5 * (mu[0] + mu[1]));
    m.shrinkage_gamma = gg;
    return m;
  };

  try {
    return solve(g);
  } catch (const std::runtime_error&) {
    if (want_auto) throw;
    return solve(ledoit_wolf_gamma(centered));  // gamma=0 singular fallback
  }
}

}  // namespace mibci
