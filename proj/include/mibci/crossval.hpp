#pragma once
// Chronological/blockwise cross-validation with a trial margin, confusion
// metrics, and the per-session evaluation driver.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "mibci/pipeline.hpp"
#include "mibci/types.hpp"

namespace mibci {

struct Fold {
  std::size_t test_begin{0}, test_end{0};  // [begin, end)
  std::vector<std::size_t> train_indices;
};

struct FoldPlan {
  std::size_t n_trials{0};
  std::size_t margin{0};
  std::vector<Fold> folds;
};

// Contiguous chronological test blocks; train excludes the block plus
// `margin` trials on each side.
inline FoldPlan plan_folds(std::size_t n_trials, std::size_t n_folds, std::size_t margin) {
  if (n_folds < 1) throw std::invalid_argument("plan_folds: need >= 1 fold");
  if (n_trials < n_folds) throw std::invalid_argument("plan_folds: more folds than trials");

  FoldPlan plan;
  plan.n_trials = n_trials;
  plan.margin = margin;
  const std::size_t base = n_trials / n_folds;
  const std::size_t extra = n_trials % n_folds;
  std::size_t start = 0;
  for (std::size_t f = 0; f < n_folds; ++f) {
    Fold fold;
    fold.test_begin = start;
    fold.test_end = start + base + (f < extra ? 1 : 0);
    start = fold.test_end;
    const std::size_t excl_lo = fold.test_begin > margin ? fold.test_begin - margin : 0;
    const std::size_t excl_hi = fold.test_end + margin;  // exclusive
    for (std::size_t i = 0; i < n_trials; ++i)
      if (i < excl_lo || i >= excl_hi) fold.train_indices.push_back(i);
    if (fold.train_indices.size() < 4)
      throw std::invalid_argument("plan_folds: insufficient train trials in fold " +
                                  std::to_string(f));
    plan.folds.push_back(std::move(fold));
  }
  return plan;
}

struct ConfusionMetrics {
  std::size_t tp{0}, tn{0}, fp{0}, fn{0};
  double accuracy{0.0}, tpr{0.0}, tnr{0.0}, fpr{0.0}, fnr{0.0};
};

// Positive class = task (1). Rates with a zero denominator come back NaN.
inline ConfusionMetrics confusion(const std::vector<int>& truth,
                                  const std::vector<int>& pred) {
  if (truth.size() != pred.size()) throw std::invalid_argument("confusion: length mismatch");
  if (truth.empty()) throw std::invalid_argument("confusion: empty input");
  ConfusionMetrics m;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool t = truth[i] == kLabelTask;
    const bool p = pred[i] == kLabelTask;
    if (t && p) ++m.tp;
    else if (t && !p) ++m.fn;
    else if (!t && p) ++m.fp;
    else ++m.tn;
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::size_t pos = m.tp + m.fn, neg = m.tn + m.fp;
  m.accuracy = static_cast<double>(m.tp + m.tn) / static_cast<double>(truth.size());
  m.tpr = pos ? static_cast<double>(m.tp) / pos : nan;
  m.fnr = pos ? static_cast<double>(m.fn) / pos : nan;
  m.tnr = neg ? static_cast<double>(m.tn) / neg : nan;
  m.fpr = neg ? static_cast<double>(m.fp) / neg : nan;
  return m;
}

struct CrossValResult {
  std::vector<ConfusionMetrics> fold_metrics;
  double mean_accuracy{0.0};
  double sd_accuracy{0.0};
  FoldPlan plan;
};

namespace detail {

inline void mean_sd(const std::vector<double>& v, double& mean, double& sd) {
  mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
}

}  // namespace detail

// Per fold the full pipeline is refit from scratch on the train indices
// only; test trials never reach any training stage.
inline CrossValResult cross_validate(const Recording& rec, SpatialMethod method,
                                     std::size_t n_folds = 10, std::size_t margin = 5,
                                     const PipelineConfig& cfg = {}) {
  const Recording prep = preprocess(rec, cfg);
  const EpochSet epochs =
      extract_epochs(prep, cfg.cue_label, cfg.task_window_s, cfg.rest_window_s).epochs;

  CrossValResult result;
  result.plan = plan_folds(epochs.n_trials(), n_folds, margin);
  std::vector<double> accs;
  for (std::size_t f = 0; f < result.plan.folds.size(); ++f) {
    const Fold& fold = result.plan.folds[f];
    try {
      const EpochSet train_set = epochs.subset(fold.train_indices);
      if (train_set.count_label(kLabelTask) < 2 || train_set.count_label(kLabelRest) < 2)
        throw std::runtime_error("fewer than 2 train trials per class");
      const PipelineModel model =
          train_pipeline_on_epochs(train_set, method, cfg, rec.channel_labels);

      std::vector<std::size_t> test_idx;
      for (std::size_t i = fold.test_begin; i < fold.test_end; ++i) test_idx.push_back(i);
      const EpochSet test_set = epochs.subset(test_idx);
      const auto preds = predict(model, test_set);
      std::vector<int> pred_labels;
      pred_labels.reserve(preds.size());
      for (const auto& p : preds) pred_labels.push_back(p.label);
      result.fold_metrics.push_back(confusion(test_set.labels, pred_labels));
      accs.push_back(result.fold_metrics.back().accuracy);
    } catch (const std::exception& e) {
      throw std::runtime_error("fold " + std::to_string(f) + ": " + e.what());
    }
  }
  detail::mean_sd(accs, result.mean_accuracy, result.sd_accuracy);
  return result;
}

}  // namespace mibci
