#pragma once
// Evaluation report assembly: per-fold CSV, aggregate "mean ± sd" table,
// full-precision JSON, and the cross-method statistical comparison.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mibci/crossval.hpp"
#include "mibci/stats.hpp"

namespace mibci {

struct SessionEval {
  std::string session;
  std::string method;
  CrossValResult result;
};

struct EvalReport {
  std::vector<std::string> methods;   // column order
  std::vector<std::string> sessions;  // row order
  std::vector<SessionEval> entries;

  const SessionEval* find(const std::string& session, const std::string& method) const {
    for (const auto& e : entries)
      if (e.session == session && e.method == method) return &e;
    return nullptr;
  }

  // session x method matrix of one metric's per-session mean over folds
  Eigen::MatrixXd metric_matrix(double ConfusionMetrics::* field) const {
    Eigen::MatrixXd m(sessions.size(), methods.size());
    for (std::size_t r = 0; r < sessions.size(); ++r)
      for (std::size_t c = 0; c < methods.size(); ++c) {
        const SessionEval* e = find(sessions[r], methods[c]);
        if (!e) throw std::runtime_error("report: missing cell " + sessions[r] + "/" + methods[c]);
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& fm : e->result.fold_metrics) {
          const double v = fm.*field;
          if (!std::isnan(v)) {
            sum += v;
            ++n;
          }
        }
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
      }
    return m;
  }
};

// One-decimal percentage layout: "65.2 ± 11.3".
inline std::string format_mean_sd(double mean_fraction, double sd_fraction) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1f ± %.1f", 100.0 * mean_fraction, 100.0 * sd_fraction);
  return buf;
}

namespace detail {

inline std::string csv_num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void mean_sd_ignore_nan(const std::vector<double>& v, double& mean, double& sd) {
  std::vector<double> clean;
  for (double x : v)
    if (!std::isnan(x)) clean.push_back(x);
  if (clean.empty()) {
    mean = sd = std::numeric_limits<double>::quiet_NaN();
    return;
  }
  mean_sd(clean, mean, sd);
}

}  // namespace detail

inline void write_fold_csv(const EvalReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "session,method,fold,acc,tpr,tnr,fpr,fnr\n";
  for (const auto& session : report.sessions)
    for (const auto& method : report.methods) {
      const SessionEval* e = report.find(session, method);
      if (!e) continue;
      for (std::size_t f = 0; f < e->result.fold_metrics.size(); ++f) {
        const auto& m = e->result.fold_metrics[f];
        out << session << ',' << method << ',' << f << ',' << detail::csv_num(m.accuracy)
            << ',' << detail::csv_num(m.tpr) << ',' << detail::csv_num(m.tnr) << ','
            << detail::csv_num(m.fpr) << ',' << detail::csv_num(m.fnr) << '\n';
      }
    }
}

// Rows = sessions with ± across folds; the Average row is ± across the
// per-session means.
inline std::string aggregate_table(const EvalReport& report) {
  std::ostringstream out;
  out << "session";
  for (const auto& m : report.methods) out << ',' << m;
  out << '\n';
  const Eigen::MatrixXd acc = report.metric_matrix(&ConfusionMetrics::accuracy);
  for (std::size_t r = 0; r < report.sessions.size(); ++r) {
    out << report.sessions[r];
    for (std::size_t c = 0; c < report.methods.size(); ++c) {
      const SessionEval* e = report.find(report.sessions[r], report.methods[c]);
      std::vector<double> accs;
      for (const auto& fm : e->result.fold_metrics) accs.push_back(fm.accuracy);
      double mean, sd;
      detail::mean_sd_ignore_nan(accs, mean, sd);
      out << ',' << format_mean_sd(mean, sd);
    }
    out << '\n';
  }
  out << "Average";
  for (std::size_t c = 0; c < report.methods.size(); ++c) {
    std::vector<double> col;
    for (std::size_t r = 0; r < report.sessions.size(); ++r)
      col.push_back(acc(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
    double mean, sd;
    detail::mean_sd_ignore_nan(col, mean, sd);
    out << ',' << format_mean_sd(mean, sd);
  }
  out << '\n';
  return out.str();
}

inline void write_aggregate_csv(const EvalReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << aggregate_table(report);
}

// Statistical comparison across methods, per metric. Requires >= 2 methods
// and >= 2 sessions with matching session sets.
inline nlohmann::json compare_methods(const EvalReport& report) {
  if (report.methods.size() < 2)
    throw std::invalid_argument("compare: need >= 2 methods");
  nlohmann::json stats;
  const std::pair<const char*, double ConfusionMetrics::*> metrics[] = {
      {"accuracy", &ConfusionMetrics::accuracy}, {"tpr", &ConfusionMetrics::tpr},
      {"tnr", &ConfusionMetrics::tnr},           {"fpr", &ConfusionMetrics::fpr},
      {"fnr", &ConfusionMetrics::fnr}};
  for (const auto& [name, field] : metrics) {
    const Eigen::MatrixXd m = report.metric_matrix(field);
    const AnovaResult anova = rm_anova(m);
    nlohmann::json jm;
    jm["anova"] = {{"f", anova.f},
                   {"df", {anova.df_method, anova.df_error}},
                   {"p", anova.p},
                   {"degenerate", anova.degenerate}};
    jm["pairwise"] = nlohmann::json::array();
    for (const auto& pw : bonferroni_pairwise(m))
      jm["pairwise"].push_back({{"pair", {report.methods[pw.method_a], report.methods[pw.method_b]}},
                                {"t", pw.t},
                                {"df", pw.df},
                                {"p_raw", pw.p_raw},
                                {"p_corrected", pw.p_corrected}});
    stats[name] = jm;
  }
  return stats;
}

inline nlohmann::json report_to_json(const EvalReport& report, bool with_stats = true) {
  nlohmann::json j;
  j["format"] = "mibci-report/1";
  j["methods"] = report.methods;
  j["sessions"] = report.sessions;
  j["results"] = nlohmann::json::array();
  for (const auto& e : report.entries) {
    nlohmann::json je;
    je["session"] = e.session;
    je["method"] = e.method;
    je["mean_accuracy"] = e.result.mean_accuracy;
    je["sd_accuracy"] = e.result.sd_accuracy;
    je["folds"] = nlohmann::json::array();
    for (const auto& m : e.result.fold_metrics) {
      auto num = [](double v) {
        return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v);
      };
      je["folds"].push_back({{"tp", m.tp},
                             {"tn", m.tn},
                             {"fp", m.fp},
                             {"fn", m.fn},
                             {"accuracy", m.accuracy},
                             {"tpr", num(m.tpr)},
                             {"tnr", num(m.tnr)},
                             {"fpr", num(m.fpr)},
                             {"fnr", num(m.fnr)}});
    }
    j["results"].push_back(je);
  }
  if (with_stats && report.methods.size() >= 2 && report.sessions.size() >= 2)
    j["statistics"] = compare_methods(report);
  return j;
}

}  // namespace mibci
