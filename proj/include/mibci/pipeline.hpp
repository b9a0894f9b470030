#pragma once
// End-to-end train/predict pipeline: bandpass -> decimate -> epochs ->
// spatial model -> log-variance features -> standardize -> shrinkage LDA.

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mibci/epochs.hpp"
#include "mibci/features.hpp"
#include "mibci/iir.hpp"
#include "mibci/spatial.hpp"
#include "mibci/speccsp.hpp"
#include "mibci/spoc.hpp"
#include "mibci/types.hpp"

namespace mibci {

struct PipelineConfig {
  double band_lo_hz{6.0};
  double band_hi_hz{32.0};
  int filter_order{2};
  double target_fs_hz{128.0};
  std::pair<double, double> task_window_s{0.5, 3.5};
  std::pair<double, double> rest_window_s{-2.5, -0.5};
  std::string cue_label{"start"};
  int n_pairs{3};
  double fb_width_hz{4.0};
  double speccsp_p{0.0};
  double speccsp_q{1.0};
  int speccsp_iterations{3};
  double lda_gamma{-1.0};  // negative = automatic shrinkage
  bool normalize_trace{true};
};

struct PipelineModel {
  PipelineConfig config;
  double trained_fs_hz{0.0};
  std::vector<std::string> channel_labels;
  SpatialModel spatial;
  Eigen::VectorXd feature_means;
  Eigen::VectorXd feature_scales;
  LdaModel lda;

  void validate() const {
    const Eigen::Index d = static_cast<Eigen::Index>(spatial.n_components());
    if (feature_means.size() != d || feature_scales.size() != d ||
        lda.weights.size() != d)
      throw std::logic_error("PipelineModel: inconsistent feature dimension");
  }
};

namespace detail {

inline SpatialModel train_spatial(const EpochSet& epochs, SpatialMethod method,
                                  const PipelineConfig& cfg) {
  switch (method) {
    case SpatialMethod::csp:
      return train_csp(epochs, cfg.n_pairs, cfg.normalize_trace);
    case SpatialMethod::fbcsp:
      return train_fbcsp(epochs,
                         make_filter_bank(cfg.band_lo_hz, cfg.band_hi_hz, cfg.fb_width_hz,
                                          epochs.sample_rate_hz, cfg.filter_order),
                         cfg.n_pairs, cfg.normalize_trace);
    case SpatialMethod::speccsp:
      return train_speccsp(epochs, cfg.n_pairs, cfg.speccsp_p, cfg.speccsp_q,
                           cfg.speccsp_iterations, 1.0, cfg.band_lo_hz, cfg.band_hi_hz);
    case SpatialMethod::spoc:
      return train_spoc(epochs, 2 * cfg.n_pairs, cfg.normalize_trace);
  }
  throw std::logic_error("bad method");
}

}  // namespace detail

// Preprocess a continuous recording: bandpass then decimate to target_fs.
inline Recording preprocess(const Recording& rec, const PipelineConfig& cfg) {
  const IirFilter bp = design_butterworth_bandpass(cfg.filter_order, cfg.band_lo_hz,
                                                   cfg.band_hi_hz, rec.sample_rate_hz);
  Recording filtered = filter_forward(bp, rec);
  const int factor = static_cast<int>(rec.sample_rate_hz / cfg.target_fs_hz + 0.5);
  return decimate(filtered, factor < 1 ? 1 : factor);
}

// Train spatial + standardization + LDA on already-preprocessed epochs.
inline PipelineModel train_pipeline_on_epochs(const EpochSet& epochs, SpatialMethod method,
                                              const PipelineConfig& cfg,
                                              std::vector<std::string> channel_labels = {}) {
  PipelineModel model;
  model.config = cfg;
  model.trained_fs_hz = epochs.sample_rate_hz;
  model.channel_labels = std::move(channel_labels);

  try {
    model.spatial = detail::train_spatial(epochs, method, cfg);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("spatial training: ") + e.what());
  }

  LogVarFeatures feats;
  try {
    feats = features_logvar(epochs, model.spatial);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("feature extraction: ") + e.what());
  }

  const Eigen::Index d = feats.values.cols();
  model.feature_means = feats.values.colwise().mean();
  model.feature_scales.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double sd = std::sqrt((feats.values.col(j).array() - model.feature_means[j])
                                    .square()
                                    .sum() /
                                static_cast<double>(feats.values.rows() - 1));
    model.feature_scales[j] = sd > 1e-12 ? sd : 1.0;
  }
  Eigen::MatrixXd standardized = feats.values;
  for (Eigen::Index j = 0; j < d; ++j)
    standardized.col(j) =
        (standardized.col(j).array() - model.feature_means[j]) / model.feature_scales[j];

  try {
    model.lda = train_lda(standardized, epochs.labels, cfg.lda_gamma);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("classifier training: ") + e.what());
  }
  model.validate();
  return model;
}

inline PipelineModel train_pipeline(const Recording& rec, SpatialMethod method,
                                    const PipelineConfig& cfg = {}) {
  Recording prep;
  try {
    prep = preprocess(rec, cfg);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("preprocessing: ") + e.what());
  }
  EpochSet epochs;
  try {
    epochs = extract_epochs(prep, cfg.cue_label, cfg.task_window_s, cfg.rest_window_s).epochs;
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("epoching: ") + e.what());
  }
  return train_pipeline_on_epochs(epochs, method, cfg, rec.channel_labels);
}

struct Prediction {
  int label{0};
  double score{0.0};
};

// Epochs must already be preprocessed to the training sample rate.
inline std::vector<Prediction> predict(const PipelineModel& model, const EpochSet& epochs) {
  model.validate();
  if (static_cast<Eigen::Index>(epochs.n_channels()) != model.spatial.bands[0].filters.rows())
    throw std::invalid_argument("predict: montage mismatch");
  const LogVarFeatures feats = features_logvar(epochs, model.spatial);
  std::vector<Prediction> out(epochs.n_trials());
  for (std::size_t t = 0; t < epochs.n_trials(); ++t) {
    Eigen::VectorXd f = feats.values.row(static_cast<Eigen::Index>(t)).transpose();
    f = (f - model.feature_means).cwiseQuotient(model.feature_scales);
    out[t].score = model.lda.score(f);
    out[t].label = model.lda.predict(f);
  }
  return out;
}

}  // namespace mibci
