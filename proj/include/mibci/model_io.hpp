#pragma once
// JSON serialization for spatial/pipeline models and synth specs.
// Matrices are stored row-major; doubles round-trip exactly.

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mibci/pipeline.hpp"
#include "mibci/spatial.hpp"
#include "mibci/synth.hpp"

namespace mibci {

inline constexpr const char* kModelFormatTag = "mibci-model/1";
inline constexpr const char* kSynthFormatTag = "mibci-synth/1";

namespace detail {

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) v.push_back(m(r, c));
  j["data"] = v;
  return j;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  Eigen::MatrixXd m(j.at("rows").get<Eigen::Index>(), j.at("cols").get<Eigen::Index>());
  const auto v = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(v.size()) != m.size())
    throw std::runtime_error("model file: matrix size mismatch");
  std::size_t i = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = v[i++];
  return m;
}

inline nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline nlohmann::json iir_to_json(const IirFilter& f) {
  return {{"b", f.b},
          {"a", f.a},
          {"order", f.order},
          {"band_hz", {f.band_hz.first, f.band_hz.second}}};
}

inline IirFilter iir_from_json(const nlohmann::json& j) {
  IirFilter f;
  f.b = j.at("b").get<std::vector<double>>();
  f.a = j.at("a").get<std::vector<double>>();
  f.order = j.at("order").get<int>();
  f.band_hz = {j.at("band_hz")[0].get<double>(), j.at("band_hz")[1].get<double>()};
  return f;
}

}  // namespace detail

inline nlohmann::json to_json(const SpatialModel& m) {
  nlohmann::json j;
  j["method"] = to_string(m.method);
  j["n_pairs"] = m.n_pairs;
  j["bands"] = nlohmann::json::array();
  for (const auto& b : m.bands) {
    nlohmann::json jb;
    jb["filter"] = b.filter ? detail::iir_to_json(*b.filter) : nlohmann::json(nullptr);
    jb["filters"] = detail::matrix_to_json(b.filters);
    jb["patterns"] = detail::matrix_to_json(b.patterns);
    jb["eigenvalues"] = detail::vector_to_json(b.eigenvalues);
    j["bands"].push_back(jb);
  }
  if (!m.spectral_freqs_hz.empty()) {
    j["spectral_freqs_hz"] = m.spectral_freqs_hz;
    j["spectral_weights"] = detail::matrix_to_json(m.spectral_weights);
  }
  return j;
}

inline SpatialModel spatial_model_from_json(const nlohmann::json& j) {
  SpatialModel m;
  m.method = spatial_method_from_string(j.at("method").get<std::string>());
  m.n_pairs = j.at("n_pairs").get<int>();
  for (const auto& jb : j.at("bands")) {
    SpatialBand b;
    if (!jb.at("filter").is_null()) b.filter = detail::iir_from_json(jb.at("filter"));
    b.filters = detail::matrix_from_json(jb.at("filters"));
    b.patterns = detail::matrix_from_json(jb.at("patterns"));
    b.eigenvalues = detail::vector_from_json(jb.at("eigenvalues"));
    m.bands.push_back(std::move(b));
  }
  if (j.contains("spectral_freqs_hz")) {
    m.spectral_freqs_hz = j.at("spectral_freqs_hz").get<std::vector<double>>();
    m.spectral_weights = detail::matrix_from_json(j.at("spectral_weights"));
  }
  return m;
}

inline nlohmann::json to_json(const PipelineModel& m) {
  nlohmann::json j;
  j["format"] = kModelFormatTag;
  j["preprocessing"] = {{"band_lo_hz", m.config.band_lo_hz},
                        {"band_hi_hz", m.config.band_hi_hz},
                        {"filter_order", m.config.filter_order},
                        {"target_fs_hz", m.config.target_fs_hz},
                        {"task_window_s", {m.config.task_window_s.first, m.config.task_window_s.second}},
                        {"rest_window_s", {m.config.rest_window_s.first, m.config.rest_window_s.second}},
                        {"cue_label", m.config.cue_label},
                        {"normalize_trace", m.config.normalize_trace}};
  j["trained_fs_hz"] = m.trained_fs_hz;
  j["channel_labels"] = m.channel_labels;
  j["spatial"] = to_json(m.spatial);
  j["feature_means"] = detail::vector_to_json(m.feature_means);
  j["feature_scales"] = detail::vector_to_json(m.feature_scales);
  j["lda"] = {{"weights", detail::vector_to_json(m.lda.weights)},
              {"bias", m.lda.bias},
              {"shrinkage_gamma", m.lda.shrinkage_gamma}};
  return j;
}

inline PipelineModel pipeline_model_from_json(const nlohmann::json& j) {
  if (j.at("format").get<std::string>() != kModelFormatTag)
    throw std::runtime_error("model file: unknown format tag");
  PipelineModel m;
  const auto& p = j.at("preprocessing");
  m.config.band_lo_hz = p.at("band_lo_hz").get<double>();
  m.config.band_hi_hz = p.at("band_hi_hz").get<double>();
  m.config.filter_order = p.at("filter_order").get<int>();
  m.config.target_fs_hz = p.at("target_fs_hz").get<double>();
  m.config.task_window_s = {p.at("task_window_s")[0].get<double>(),
                            p.at("task_window_s")[1].get<double>()};
  m.config.rest_window_s = {p.at("rest_window_s")[0].get<double>(),
                            p.at("rest_window_s")[1].get<double>()};
  m.config.cue_label = p.at("cue_label").get<std::string>();
  m.config.normalize_trace = p.at("normalize_trace").get<bool>();
  m.trained_fs_hz = j.at("trained_fs_hz").get<double>();
  m.channel_labels = j.at("channel_labels").get<std::vector<std::string>>();
  m.spatial = spatial_model_from_json(j.at("spatial"));
  m.feature_means = detail::vector_from_json(j.at("feature_means"));
  m.feature_scales = detail::vector_from_json(j.at("feature_scales"));
  m.lda.weights = detail::vector_from_json(j.at("lda").at("weights"));
  m.lda.bias = j.at("lda").at("bias").get<double>();
  m.lda.shrinkage_gamma = j.at("lda").at("shrinkage_gamma").get<double>();
  m.validate();
  return m;
}

inline nlohmann::json to_json(const SynthSpec& s) {
  nlohmann::json j;
  j["format"] = kSynthFormatTag;
  j["n_channels"] = s.n_channels;
  j["sources"] = nlohmann::json::array();
  for (const auto& src : s.sources)
    j["sources"].push_back({{"center_hz", src.center_hz},
                            {"bandwidth_hz", src.bandwidth_hz},
                            {"modulation", src.modulation}});
  j["snr_db"] = s.snr_db;
  j["n_trials"] = s.n_trials;
  j["task_s"] = s.task_s;
  j["iti_s"] = s.iti_s;
  j["fs_hz"] = s.fs_hz;
  j["seed"] = s.seed;
  if (s.mixing) j["mixing"] = detail::matrix_to_json(*s.mixing);
  return j;
}

inline SynthSpec synth_spec_from_json(const nlohmann::json& j) {
  SynthSpec s;
  s.n_channels = j.at("n_channels").get<int>();
  s.sources.clear();
  for (const auto& js : j.at("sources"))
    s.sources.push_back({js.at("center_hz").get<double>(), js.at("bandwidth_hz").get<double>(),
                         js.at("modulation").get<double>()});
  s.snr_db = j.at("snr_db").get<double>();
  s.n_trials = j.at("n_trials").get<int>();
  s.task_s = j.at("task_s").get<double>();
  s.iti_s = j.at("iti_s").get<double>();
  s.fs_hz = j.at("fs_hz").get<double>();
  s.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("mixing")) s.mixing = detail::matrix_from_json(j.at("mixing"));
  s.validate();
  return s;
}

inline void save_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
}

inline nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  return nlohmann::json::parse(in);
}

}  // namespace mibci
