#pragma once
// CSP core and filter-bank CSP. Each trainer produces a SpatialModel:
// per-band spatial filters W, matching patterns A = C W (W^T C W)^-1, and
// the eigenvalues of the (C_task, C_task + C_rest) pencil.

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mibci/iir.hpp"
#include "mibci/linalg.hpp"
#include "mibci/types.hpp"

namespace mibci {

enum class SpatialMethod { csp, fbcsp, speccsp, spoc };

inline std::string to_string(SpatialMethod m) {
  switch (m) {
    case SpatialMethod::csp: return "csp";
    case SpatialMethod::fbcsp: return "fbcsp";
    case SpatialMethod::speccsp: return "speccsp";
    case SpatialMethod::spoc: return "spoc";
  }
  throw std::logic_error("bad method");
}

inline SpatialMethod spatial_method_from_string(const std::string& s) {
  if (s == "csp") return SpatialMethod::csp;
  if (s == "fbcsp") return SpatialMethod::fbcsp;
  if (s == "speccsp") return SpatialMethod::speccsp;
  if (s == "spoc") return SpatialMethod::spoc;
  throw std::invalid_argument("unknown method: " + s);
}

struct SpatialBand {
  std::optional<IirFilter> filter;  // absent = broadband (no extra filtering)
  Eigen::MatrixXd filters;          // channel x component
  Eigen::MatrixXd patterns;         // channel x component
  Eigen::VectorXd eigenvalues;      // per component
};

struct SpatialModel {
  SpatialMethod method{SpatialMethod::csp};
  std::vector<SpatialBand> bands;
  int n_pairs{0};
  // SpecCSP only: per-frequency weights, one column per component
  std::vector<double> spectral_freqs_hz;
  Eigen::MatrixXd spectral_weights;

  std::size_t n_components() const {
    std::size_t n = 0;
    for (const auto& b : bands) n += static_cast<std::size_t>(b.filters.cols());
    return n;
  }
};

namespace detail {

// Class-mean covariances; c[0] = rest, c[1] = task.
inline std::array<Covariance, 2> class_covariances(const EpochSet& epochs,
                                                   bool normalize_trace = true) {
  const std::size_t n_ch = epochs.n_channels();
  std::array<Covariance, 2> c{Covariance{Eigen::MatrixXd::Zero(n_ch, n_ch), 0},
                              Covariance{Eigen::MatrixXd::Zero(n_ch, n_ch), 0}};
  std::size_t counts[2] = {0, 0};
  for (std::size_t t = 0; t < epochs.n_trials(); ++t) {
    const int cls = epochs.labels[t] == kLabelTask ? 1 : 0;
    const Covariance ct = covariance(epochs.data[t], normalize_trace);
    c[cls].matrix += ct.matrix;
    c[cls].n_observations += ct.n_observations;
    ++counts[cls];
  }
  if (counts[0] == 0 || counts[1] == 0)
    throw std::invalid_argument("training requires both classes present");
  for (int cls = 0; cls < 2; ++cls) c[cls].matrix /= static_cast<double>(counts[cls]);
  return c;
}

// A = C W (W^T C W)^-1
inline Eigen::MatrixXd patterns_from_filters(const Eigen::MatrixXd& composite_cov,
                                             const Eigen::MatrixXd& w) {
  const Eigen::MatrixXd cw = composite_cov * w;
  return cw * (w.transpose() * cw).inverse();
}

// Deterministic sign: each filter scaled so its largest-magnitude pattern
// coefficient is positive.
inline void fix_signs(Eigen::MatrixXd& filters, Eigen::MatrixXd& patterns) {
  for (Eigen::Index j = 0; j < filters.cols(); ++j) {
    Eigen::Index imax = 0;
    patterns.col(j).cwiseAbs().maxCoeff(&imax);
    if (patterns(imax, j) < 0.0) {
      patterns.col(j) *= -1.0;
      filters.col(j) *= -1.0;
    }
  }
}

// Columns from both ends of the spectrum: n_top leading, n_bottom trailing.
inline Eigen::MatrixXd spectral_ends(const Eigen::MatrixXd& vecs, int n_top, int n_bottom) {
  Eigen::MatrixXd w(vecs.rows(), n_top + n_bottom);
  for (int j = 0; j < n_top; ++j) w.col(j) = vecs.col(j);
  for (int j = 0; j < n_bottom; ++j)
    w.col(n_top + j) = vecs.col(vecs.cols() - n_bottom + j);
  return w;
}

inline Eigen::VectorXd spectral_ends(const Eigen::VectorXd& vals, int n_top, int n_bottom) {
  Eigen::VectorXd v(n_top + n_bottom);
  for (int j = 0; j < n_top; ++j) v[j] = vals[j];
  for (int j = 0; j < n_bottom; ++j) v[n_top + j] = vals[vals.size() - n_bottom + j];
  return v;
}

inline SpatialBand csp_band(const EpochSet& epochs, int n_pairs, bool normalize_trace) {
  const auto c = class_covariances(epochs, normalize_trace);
  Covariance composite{c[0].matrix + c[1].matrix, c[0].n_observations + c[1].n_observations};
  const EigenBasis eig = generalized_eig_sym(c[1], composite);

  SpatialBand band;
  band.filters = spectral_ends(eig.eigenvectors, n_pairs, n_pairs);
  band.eigenvalues = spectral_ends(eig.eigenvalues, n_pairs, n_pairs);
  band.patterns = patterns_from_filters(composite.matrix, band.filters);
  fix_signs(band.filters, band.patterns);
  return band;
}

}  // namespace detail

inline SpatialModel train_csp(const EpochSet& epochs, int n_pairs = 3,
                              bool normalize_trace = true) {
  epochs.validate();
  if (n_pairs < 1) throw std::invalid_argument("train_csp: n_pairs must be >= 1");
  if (static_cast<std::size_t>(2 * n_pairs) > epochs.n_channels())
    throw std::invalid_argument("train_csp: n_pairs too large for channel count");

  SpatialModel model;
  model.method = SpatialMethod::csp;
  model.n_pairs = n_pairs;
  model.bands.push_back(detail::csp_band(epochs, n_pairs, normalize_trace));
  return model;
}

// One CSP model per subband of `bank`; a failing band aborts training.
inline SpatialModel train_fbcsp(const EpochSet& epochs_broadband,
                                const std::vector<IirFilter>& bank, int n_pairs = 3,
                                bool normalize_trace = true) {
  if (bank.empty()) throw std::invalid_argument("train_fbcsp: empty filter bank");
  epochs_broadband.validate();
  if (static_cast<std::size_t>(2 * n_pairs) > epochs_broadband.n_channels())
    throw std::invalid_argument("train_fbcsp: n_pairs too large for channel count");

  SpatialModel model;
  model.method = SpatialMethod::fbcsp;
  model.n_pairs = n_pairs;
  for (std::size_t bi = 0; bi < bank.size(); ++bi) {
    try {
      const EpochSet filtered = filter_forward(bank[bi], epochs_broadband);
      SpatialBand band = detail::csp_band(filtered, n_pairs, normalize_trace);
      band.filter = bank[bi];
      model.bands.push_back(std::move(band));
    } catch (const std::exception& e) {
      throw std::runtime_error("train_fbcsp: band " + std::to_string(bi) + " [" +
                               std::to_string(bank[bi].band_hz.first) + "," +
                               std::to_string(bank[bi].band_hz.second) +
                               ") failed: " + e.what());
    }
  }
  return model;
}

}  // namespace mibci
