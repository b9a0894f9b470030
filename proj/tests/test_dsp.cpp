#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mibci/iir.hpp"
#include "mibci/spectrum.hpp"
#include "mibci/types.hpp"
#include "test_util.hpp"

using namespace mibci;

TEST_CASE("Butterworth bandpass 6-32 Hz at fs 256") {
  const IirFilter f = design_butterworth_bandpass(2, 6.0, 32.0, 256.0);

  CHECK(f.magnitude_db(6.0, 256.0) == doctest::Approx(-3.0).epsilon(0.2));
  CHECK(f.magnitude_db(32.0, 256.0) == doctest::Approx(-3.0).epsilon(0.2));
  CHECK(f.magnitude_db(6.0, 256.0) > -3.5);
  CHECK(f.magnitude_db(6.0, 256.0) < -2.5);
  CHECK(f.magnitude_db(32.0, 256.0) > -3.5);
  CHECK(f.magnitude_db(32.0, 256.0) < -2.5);

  SUBCASE("DC gain is exactly zero") {
    double sum_b = 0.0;
    for (double c : f.b) sum_b += c;
    CHECK(sum_b == 0.0);
  }
  SUBCASE("center gain near 0 dB at geometric mean") {
    const double center = std::sqrt(6.0 * 32.0);  // ~13.9 Hz
    CHECK(std::fabs(f.magnitude_db(center, 256.0)) < 0.5);
  }
  SUBCASE("stable with margin") {
    for (double m : f.pole_magnitudes()) CHECK(m < 1.0 - 1e-6);
  }
  SUBCASE("Nyquist violations rejected") {
    CHECK_THROWS_AS(design_butterworth_bandpass(2, 6.0, 130.0, 256.0), std::invalid_argument);
    CHECK_THROWS_AS(design_butterworth_bandpass(2, 32.0, 6.0, 256.0), std::invalid_argument);
    CHECK_THROWS_AS(design_butterworth_bandpass(0, 6.0, 32.0, 256.0), std::invalid_argument);
  }
}

TEST_CASE("filter_forward") {
  const IirFilter f = design_butterworth_bandpass(2, 6.0, 32.0, 256.0);

  SUBCASE("zero in, zero out") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(2, 100);
    CHECK(filter_forward(f, x).isZero(0.0));
  }
  SUBCASE("impulse response has finite energy") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(1, 4096);
    x(0, 0) = 1.0;
    const Eigen::MatrixXd y = filter_forward(f, x);
    const double energy = y.array().square().sum();
    CHECK(std::isfinite(energy));
    // tail has decayed
    CHECK(y.rightCols(100).array().abs().maxCoeff() < 1e-10);
  }
  SUBCASE("steady-state sinusoid matches analytic |H|") {
    const double freq = 20.0, fs = 256.0;
    const int n = 4096;
    Eigen::MatrixXd x(1, n);
    for (int i = 0; i < n; ++i)
      x(0, i) = std::sin(2.0 * std::numbers::pi * freq * i / fs);
    const Eigen::MatrixXd y = filter_forward(f, x);
    const double amp = y.rightCols(1024).array().abs().maxCoeff();
    CHECK(amp == doctest::Approx(std::abs(f.response(freq, fs))).epsilon(0.01));
  }
  SUBCASE("linearity") {
    const Eigen::MatrixXd x = testutil::randn(3, 256, 11);
    const Eigen::MatrixXd y = testutil::randn(3, 256, 12);
    const Eigen::MatrixXd lhs = filter_forward(f, 2.5 * x - 1.25 * y);
    const Eigen::MatrixXd rhs = 2.5 * filter_forward(f, x) - 1.25 * filter_forward(f, y);
    CHECK((lhs - rhs).norm() < 1e-9 * rhs.norm());
  }
}

TEST_CASE("decimate") {
  Recording rec = testutil::make_recording(2, 2560, 256.0);
  rec.markers = {{100, "start"}, {1001, "start"}};

  SUBCASE("factor 2 halves the rate") {
    const Recording out = decimate(rec, 2);
    CHECK(out.sample_rate_hz == 128.0);
    CHECK(out.n_samples() == 1280);
    CHECK(out.markers[0].sample_index == 50);
    CHECK(out.markers[1].sample_index == 500);
  }
  SUBCASE("factor 1 is the identity") {
    const Recording out = decimate(rec, 1);
    CHECK(testutil::bit_equal(out.samples, rec.samples));
  }
  SUBCASE("passband tone amplitude preserved within 2%") {
    Recording tone;
    tone.sample_rate_hz = 256.0;
    tone.channel_labels = {"c0"};
    tone.samples.resize(1, 8192);
    for (int i = 0; i < 8192; ++i)
      tone.samples(0, i) = std::sin(2.0 * std::numbers::pi * 10.0 * i / 256.0);
    const Recording out = decimate(tone, 2);
    const double amp = out.samples.rightCols(1024).array().abs().maxCoeff();
    CHECK(amp == doctest::Approx(1.0).epsilon(0.02));
  }
  SUBCASE("bad factor") { CHECK_THROWS_AS(decimate(rec, 0), std::invalid_argument); }
}

TEST_CASE("make_filter_bank") {
  SUBCASE("default 6-32 by 4 gives 7 bands, last [30,32]") {
    const auto bank = make_filter_bank(6.0, 32.0, 4.0, 128.0);
    REQUIRE(bank.size() == 7);
    CHECK(bank[0].band_hz == std::pair<double, double>{6.0, 10.0});
    CHECK(bank[6].band_hz == std::pair<double, double>{30.0, 32.0});
    SUBCASE("bands tile without gaps or overlaps") {
      for (std::size_t i = 1; i < bank.size(); ++i)
        CHECK(bank[i].band_hz.first == bank[i - 1].band_hz.second);
    }
  }
  SUBCASE("single exact band") {
    const auto bank = make_filter_bank(6.0, 10.0, 4.0, 128.0);
    REQUIRE(bank.size() == 1);
    CHECK(bank[0].band_hz == std::pair<double, double>{6.0, 10.0});
  }
  SUBCASE("width wider than range degenerates to broadband") {
    const auto bank = make_filter_bank(6.0, 32.0, 26.0, 128.0);
    REQUIRE(bank.size() == 1);
    CHECK(bank[0].band_hz == std::pair<double, double>{6.0, 32.0});
    const IirFilter broadband = design_butterworth_bandpass(2, 6.0, 32.0, 128.0);
    CHECK(bank[0].b == broadband.b);
    CHECK(bank[0].a == broadband.a);
  }
  SUBCASE("sub-1 Hz final sliver merges into predecessor") {
    const auto bank = make_filter_bank(6.0, 32.5, 4.0, 128.0);
    CHECK(bank.back().band_hz.second == 32.5);
    CHECK(bank.back().band_hz.first == 30.0);
  }
  SUBCASE("every bank filter is stable") {
    for (const auto& f : make_filter_bank(6.0, 32.0, 4.0, 128.0))
      for (double m : f.pole_magnitudes()) CHECK(m < 1.0 - 1e-6);
  }
}

namespace {

EpochSet epochs_from_trials(std::vector<Eigen::MatrixXd> trials, std::vector<int> labels,
                            double fs) {
  EpochSet ep;
  ep.data = std::move(trials);
  ep.labels = std::move(labels);
  for (std::size_t i = 0; i < ep.data.size(); ++i) ep.trial_order.push_back(i);
  ep.sample_rate_hz = fs;
  return ep;
}

}  // namespace

TEST_CASE("cross_spectra") {
  const double fs = 128.0;

  SUBCASE("white noise gives diagonal-dominant V") {
    std::mt19937 rng(5);
    std::normal_distribution<double> normal;
    std::vector<Eigen::MatrixXd> trials;
    std::vector<int> labels;
    const int n_trials = 500;
    for (int t = 0; t < n_trials; ++t) {
      Eigen::MatrixXd x(2, 384);
      for (int ch = 0; ch < 2; ++ch)
        for (int s = 0; s < 384; ++s) x(ch, s) = normal(rng);
      trials.push_back(x);
      labels.push_back(t % 2);
    }
    const CrossSpectrumSet cs = cross_spectra(epochs_from_trials(trials, labels, fs));
    // ~5 windows/trial x 250 trials per class; SE of off-diagonal ~ diag/sqrt(n)
    const double n_windows = 5.0 * 250.0;
    for (int c = 0; c < 2; ++c)
      for (std::size_t bi = 0; bi < cs.n_bins(); ++bi) {
        const double diag = cs.v[c][bi].real().diagonal().mean();
        CHECK(std::abs(cs.v[c][bi](0, 1)) < 5.0 * diag / std::sqrt(n_windows));
      }
  }

  SUBCASE("rank-1 common source with gains (1,2)") {
    std::vector<Eigen::MatrixXd> trials;
    std::vector<int> labels;
    for (int t = 0; t < 4; ++t) {
      Eigen::MatrixXd x(2, 384);
      for (int s = 0; s < 384; ++s) {
        const double v = std::sin(2.0 * std::numbers::pi * 11.0 * s / fs + 0.3 * t);
        x(0, s) = v;
        x(1, s) = 2.0 * v;
      }
      trials.push_back(x);
      labels.push_back(t % 2);
    }
    const CrossSpectrumSet cs = cross_spectra(epochs_from_trials(trials, labels, fs));
    std::size_t bi11 = 0;
    for (std::size_t i = 0; i < cs.n_bins(); ++i)
      if (cs.frequencies_hz[i] == 11.0) bi11 = i;
    const Eigen::MatrixXd v = cs.v[1][bi11].real();
    const double scale = v(0, 0);
    REQUIRE(scale > 0.0);
    CHECK(v(0, 1) / scale == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(v(1, 0) / scale == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(v(1, 1) / scale == doctest::Approx(4.0).epsilon(1e-6));
  }

  SUBCASE("zero epochs give all-zero matrices") {
    std::vector<Eigen::MatrixXd> trials(4, Eigen::MatrixXd::Zero(2, 384));
    const CrossSpectrumSet cs =
        cross_spectra(epochs_from_trials(trials, {0, 1, 0, 1}, fs));
    for (int c = 0; c < 2; ++c)
      for (const auto& v : cs.v[c]) CHECK(v.norm() == 0.0);
  }

  SUBCASE("Hermitian positive semidefinite") {
    std::vector<Eigen::MatrixXd> trials;
    for (int t = 0; t < 6; ++t) trials.push_back(testutil::randn(4, 384, 100 + t));
    const CrossSpectrumSet cs =
        cross_spectra(epochs_from_trials(trials, {0, 1, 0, 1, 0, 1}, fs));
    for (int c = 0; c < 2; ++c)
      for (const auto& v : cs.v[c]) {
        CHECK((v - v.adjoint()).norm() < 1e-10 * v.norm());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(v);
        CHECK(es.eigenvalues().minCoeff() >= -1e-10 * v.real().trace());
      }
  }

  SUBCASE("epoch shorter than one window throws") {
    std::vector<Eigen::MatrixXd> trials(2, Eigen::MatrixXd::Zero(2, 64));
    CHECK_THROWS_AS(cross_spectra(epochs_from_trials(trials, {0, 1}, fs)),
                    std::invalid_argument);
  }
}
