#pragma once
// One-way repeated-measures ANOVA and Bonferroni-corrected paired t-tests.
// p-values come from the regularized incomplete beta function.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mibci {

namespace detail {

// Continued-fraction evaluation (Lentz) of the regularized incomplete beta.
inline double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-14;
  constexpr double kFpMin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

inline double betainc_reg(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log(1.0 - x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace detail

// Upper tail of the F distribution.
inline double f_sf(double f, double df1, double df2) {
  if (f <= 0.0) return 1.0;
  return detail::betainc_reg(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f));
}

// Two-sided p for Student's t.
inline double t_sf_two_sided(double t, double df) {
  return detail::betainc_reg(df / 2.0, 0.5, df / (df + t * t));
}

struct AnovaResult {
  double f{0.0};
  int df_method{0}, df_error{0};
  double p{1.0};
  bool degenerate{false};  // zero error variance with nonzero effect
};

// One-way repeated measures: rows = units (sessions), columns = methods.
// F = MS_method / MS_(method x unit).
inline AnovaResult rm_anova(const Eigen::MatrixXd& values) {
  const Eigen::Index n = values.rows(), k = values.cols();
  if (k < 2) throw std::invalid_argument("rm_anova: need >= 2 methods");
  if (n < 2) throw std::invalid_argument("rm_anova: need >= 2 units");

  const double grand = values.mean();
  const Eigen::VectorXd col_means = values.colwise().mean();
  const Eigen::VectorXd row_means = values.rowwise().mean();

  const double ss_method = n * (col_means.array() - grand).square().sum();
  const double ss_unit = k * (row_means.array() - grand).square().sum();
  const double ss_total = (values.array() - grand).square().sum();
  const double ss_error = ss_total - ss_method - ss_unit;

  AnovaResult r;
  r.df_method = static_cast<int>(k - 1);
  r.df_error = static_cast<int>((k - 1) * (n - 1));
  const double ms_method = ss_method / r.df_method;
  const double ms_error = ss_error / r.df_error;

  const double scale = ss_total > 0.0 ? ss_total : 1.0;
  if (ms_error <= 1e-14 * scale) {
    if (ms_method <= 1e-14 * scale) {
      r.f = 0.0;
      r.p = 1.0;
    } else {
      r.f = std::numeric_limits<double>::infinity();
      r.p = 0.0;
      r.degenerate = true;
    }
    return r;
  }
  r.f = ms_method / ms_error;
  r.p = f_sf(r.f, r.df_method, r.df_error);
  return r;
}

struct PairwiseResult {
  int method_a{0}, method_b{0};
  double t{0.0};
  int df{0};
  double p_raw{1.0};
  double p_corrected{1.0};
};

// Paired t-test per method pair; p_corrected = min(1, p * n_pairs).
inline std::vector<PairwiseResult> bonferroni_pairwise(const Eigen::MatrixXd& values) {
  const Eigen::Index n = values.rows(), k = values.cols();
  if (k < 2) throw std::invalid_argument("bonferroni_pairwise: need >= 2 methods");
  if (n < 2) throw std::invalid_argument("bonferroni_pairwise: need >= 2 units");

  std::vector<PairwiseResult> results;
  const int n_pairs = static_cast<int>(k * (k - 1) / 2);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = a + 1; b < k; ++b) {
      const Eigen::VectorXd d = values.col(a) - values.col(b);
      const double mean = d.mean();
      const double sd = std::sqrt((d.array() - mean).square().sum() / (n - 1));
      PairwiseResult r;
      r.method_a = static_cast<int>(a);
      r.method_b = static_cast<int>(b);
      r.df = static_cast<int>(n - 1);
      if (sd <= 0.0) {
        r.t = mean == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        r.p_raw = mean == 0.0 ? 1.0 : 0.0;
      } else {
        r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
        r.p_raw = t_sf_two_sided(r.t, r.df);
      }
      r.p_corrected = std::min(1.0, r.p_raw * n_pairs);
      results.push_back(r);
    }
  }
  return results;
}

}  // namespace mibci
