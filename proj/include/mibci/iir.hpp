#pragma once
// Butterworth IIR design (bilinear transform with prewarping), causal
// filtering, decimation and filter-bank construction.

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "mibci/types.hpp"

namespace mibci {

struct IirFilter {
  std::vector<double> b;  // numerator
  std::vector<double> a;  // denominator, a[0] == 1
  int order{0};           // prototype order
  std::pair<double, double> band_hz{0.0, 0.0};

  // Complex gain at frequency f for sampling rate fs.
  std::complex<double> response(double f_hz, double fs_hz) const {
    const std::complex<double> zinv =
        std::exp(std::complex<double>(0.0, -2.0 * std::numbers::pi * f_hz / fs_hz));
    std::complex<double> num = 0.0, den = 0.0, zp = 1.0;
    for (std::size_t i = 0; i < std::max(b.size(), a.size()); ++i) {
      if (i < b.size()) num += b[i] * zp;
      if (i < a.size()) den += a[i] * zp;
      zp *= zinv;
    }
    return num / den;
  }

  double magnitude_db(double f_hz, double fs_hz) const {
    return 20.0 * std::log10(std::abs(response(f_hz, fs_hz)));
  }

  // Magnitudes of the denominator roots; all < 1 for a stable filter.
  std::vector<double> pole_magnitudes() const {
    const std::size_t n = a.size() - 1;
    if (n == 0) return {};
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < n; ++i) companion(0, i) = -a[i + 1] / a[0];
    for (std::size_t i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
    std::vector<double> mags(n);
    for (std::size_t i = 0; i < n; ++i) mags[i] = std::abs(es.eigenvalues()[i]);
    return mags;
  }

  bool stable() const {
    for (double m : pole_magnitudes())
      if (m >= 1.0) return false;
    return true;
  }
};

namespace detail {

inline std::vector<std::complex<double>> butter_prototype_poles(int order) {
  std::vector<std::complex<double>> poles;
  poles.reserve(order);
  for (int k = 0; k < order; ++k) {
    const double theta = std::numbers::pi * (2.0 * k + order + 1.0) / (2.0 * order);
    poles.emplace_back(std::cos(theta), std::sin(theta));
  }
  return poles;
}

// Expand a monic polynomial from its roots; returns coefficients of
// z^n + c1 z^{n-1} + ... with descending powers.
inline std::vector<std::complex<double>> poly_from_roots(
    const std::vector<std::complex<double>>& roots) {
  std::vector<std::complex<double>> c{1.0};
  for (const auto& r : roots) {
    std::vector<std::complex<double>> next(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i] += c[i];
      next[i + 1] -= c[i] * r;
    }
    c = std::move(next);
  }
  return c;
}

struct Zpk {
  std::vector<std::complex<double>> zeros, poles;
  double gain{1.0};
};

// Tustin map s -> 2 fs (z-1)/(z+1); zeros at infinity land on z = -1.
inline Zpk bilinear(const Zpk& analog, double fs_hz) {
  const double fs2 = 2.0 * fs_hz;
  Zpk digital;
  std::complex<double> num = 1.0, den = 1.0;
  for (const auto& z : analog.zeros) {
    digital.zeros.push_back((fs2 + z) / (fs2 - z));
    num *= fs2 - z;
  }
  for (const auto& p : analog.poles) {
    digital.poles.push_back((fs2 + p) / (fs2 - p));
    den *= fs2 - p;
  }
  while (digital.zeros.size() < digital.poles.size()) digital.zeros.emplace_back(-1.0);
  digital.gain = analog.gain * (num / den).real();
  return digital;
}

inline IirFilter to_tf(const Zpk& zpk, int order, std::pair<double, double> band) {
  const auto bnum = poly_from_roots(zpk.zeros);
  const auto aden = poly_from_roots(zpk.poles);
  IirFilter f;
  f.order = order;
  f.band_hz = band;
  f.b.reserve(bnum.size());
  f.a.reserve(aden.size());
  for (const auto& c : bnum) f.b.push_back(c.real() * zpk.gain);
  for (const auto& c : aden) f.a.push_back(c.real());
  return f;
}

}  // namespace detail

// Bandpass of the given prototype order (2n poles overall). Edge
// frequencies sit at -3 dB by construction.
inline IirFilter design_butterworth_bandpass(int order, double low_hz, double high_hz,
                                             double fs_hz) {
  if (order < 1) throw std::invalid_argument("bandpass: order must be >= 1");
  if (!(0.0 < low_hz && low_hz < high_hz && high_hz < fs_hz / 2.0))
    throw std::invalid_argument("bandpass: need 0 < low < high < fs/2");

  const double wl = 2.0 * fs_hz * std::tan(std::numbers::pi * low_hz / fs_hz);
  const double wh = 2.0 * fs_hz * std::tan(std::numbers::pi * high_hz / fs_hz);
  const double w0sq = wl * wh;
  const double bw = wh - wl;

  detail::Zpk analog;
  for (const auto& p : detail::butter_prototype_poles(order)) {
    const std::complex<double> s = p * (bw / 2.0);
    const std::complex<double> disc = std::sqrt(s * s - w0sq);
    analog.poles.push_back(s + disc);
    analog.poles.push_back(s - disc);
  }
  analog.zeros.assign(order, std::complex<double>(0.0));
  analog.gain = std::pow(bw, order);

  return detail::to_tf(detail::bilinear(analog, fs_hz), order, {low_hz, high_hz});
}

inline IirFilter design_butterworth_lowpass(int order, double cutoff_hz, double fs_hz) {
  if (order < 1) throw std::invalid_argument("lowpass: order must be >= 1");
  if (!(0.0 < cutoff_hz && cutoff_hz < fs_hz / 2.0))
    throw std::invalid_argument("lowpass: need 0 < cutoff < fs/2");

  const double wc = 2.0 * fs_hz * std::tan(std::numbers::pi * cutoff_hz / fs_hz);
  detail::Zpk analog;
  for (const auto& p : detail::butter_prototype_poles(order)) analog.poles.push_back(p * wc);
  analog.gain = std::pow(wc, order);

  return detail::to_tf(detail::bilinear(analog, fs_hz), order, {0.0, cutoff_hz});
}

// Causal direct form II transposed, zero initial state.
inline void filter_forward_inplace(const IirFilter& f, Eigen::Ref<Eigen::VectorXd> x) {
  const std::size_t nb = f.b.size(), na = f.a.size();
  const std::size_t ns = std::max(nb, na) - 1;
  std::vector<double> state(ns, 0.0);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    const double yi = f.b[0] * xi + (ns ? state[0] : 0.0);
    for (std::size_t j = 0; j + 1 < ns; ++j) {
      state[j] = state[j + 1];
      if (j + 1 < nb) state[j] += f.b[j + 1] * xi;
      if (j + 1 < na) state[j] -= f.a[j + 1] * yi;
    }
    if (ns) {
      state[ns - 1] = 0.0;
      if (ns < nb) state[ns - 1] += f.b[ns] * xi;
      if (ns < na) state[ns - 1] -= f.a[ns] * yi;
    }
    x[i] = yi;
  }
}

inline Eigen::MatrixXd filter_forward(const IirFilter& f, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd y = x;
  for (Eigen::Index ch = 0; ch < y.rows(); ++ch) {
    Eigen::VectorXd row = y.row(ch);
    filter_forward_inplace(f, row);
    y.row(ch) = row;
  }
  return y;
}

inline Recording filter_forward(const IirFilter& f, const Recording& rec) {
  Recording out = rec;
  out.samples = filter_forward(f, rec.samples);
  return out;
}

inline EpochSet filter_forward(const IirFilter& f, const EpochSet& epochs) {
  EpochSet out = epochs;
  for (auto& t : out.data) t = filter_forward(f, t);
  return out;
}

// Anti-aliased downsampling; marker indices rescale by integer division.
inline Recording decimate(const Recording& rec, int factor) {
  if (factor <= 0) throw std::invalid_argument("decimate: factor must be positive");
  if (factor == 1) return rec;

  const double new_fs = rec.sample_rate_hz / factor;
  const IirFilter aa = design_butterworth_lowpass(8, 0.8 * new_fs / 2.0, rec.sample_rate_hz);
  const Eigen::MatrixXd filtered = filter_forward(aa, rec.samples);

  Recording out;
  out.channel_labels = rec.channel_labels;
  out.sample_rate_hz = new_fs;
  const Eigen::Index n_out = filtered.cols() / factor;
  out.samples.resize(filtered.rows(), n_out);
  for (Eigen::Index i = 0; i < n_out; ++i) out.samples.col(i) = filtered.col(i * factor);
  for (const auto& m : rec.markers) {
    const std::size_t idx = m.sample_index / factor;
    if (idx < static_cast<std::size_t>(n_out)) out.markers.push_back({idx, m.label});
  }
  return out;
}

// Contiguous non-overlapping bands tiling [low, high]; a final sliver
// narrower than 1 Hz merges into its predecessor.
inline std::vector<IirFilter> make_filter_bank(double low_hz, double high_hz, double width_hz,
                                               double fs_hz, int order = 2) {
  if (!(width_hz > 0.0)) throw std::invalid_argument("filter bank: width must be positive");
  std::vector<std::pair<double, double>> bands;
  for (double lo = low_hz; lo < high_hz; lo += width_hz) {
    const double hi = std::min(lo + width_hz, high_hz);
    bands.emplace_back(lo, hi);
  }
  if (bands.size() > 1 && bands.back().second - bands.back().first < 1.0) {
    bands[bands.size() - 2].second = bands.back().second;
    bands.pop_back();
  }
  std::vector<IirFilter> bank;
  bank.reserve(bands.size());
  for (const auto& [lo, hi] : bands)
    bank.push_back(design_butterworth_bandpass(order, lo, hi, fs_hz));
  return bank;
}

}  // namespace mibci
