// Offline MI-BCI calibration toolkit: synthesize sessions, train models,
// run chronological cross-validation, and compare methods statistically.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mibci/crossval.hpp"
#include "mibci/io.hpp"
#include "mibci/model_io.hpp"
#include "mibci/pipeline.hpp"
#include "mibci/report.hpp"
#include "mibci/synth.hpp"

namespace fs = std::filesystem;
using namespace mibci;

namespace {

RecordingFormat format_for(const std::string& path) {
  return fs::path(path).extension() == ".csv" ? RecordingFormat::csv
                                              : RecordingFormat::raw_binary;
}

std::string session_id(const std::string& path) { return fs::path(path).stem().string(); }

std::vector<SpatialMethod> parse_methods(const std::vector<std::string>& names) {
  std::vector<SpatialMethod> methods;
  for (const auto& n : names) methods.push_back(spatial_method_from_string(n));
  return methods;
}

void add_pipeline_flags(CLI::App* cmd, PipelineConfig& cfg, std::string& band) {
  cmd->add_option("--band", band, "Bandpass range as lo:hi Hz (default 6:32)");
  cmd->add_option("--pairs", cfg.n_pairs, "CSP filter pairs per band");
  cmd->add_option("--fb-width", cfg.fb_width_hz, "Filter-bank subband width in Hz");
  cmd->add_option("--target-fs", cfg.target_fs_hz, "Sample rate after decimation");
}

void apply_band(const std::string& band, PipelineConfig& cfg) {
  if (band.empty()) return;
  const auto colon = band.find(':');
  if (colon == std::string::npos)
    throw CLI::ValidationError("--band", "expected lo:hi, got " + band);
  cfg.band_lo_hz = std::stod(band.substr(0, colon));
  cfg.band_hi_hz = std::stod(band.substr(colon + 1));
}

int run_synth(const std::string& out_dir, int sessions, std::uint64_t seed, SynthSpec base,
              const std::string& format) {
  base.validate();
  fs::create_directories(out_dir);
  const RecordingFormat fmt =
      format == "csv" ? RecordingFormat::csv : RecordingFormat::raw_binary;
  const std::string ext = format == "csv" ? ".csv" : ".bin";
  for (int i = 0; i < sessions; ++i) {
    SynthSpec spec = base;
    spec.seed = seed + static_cast<std::uint64_t>(i);
    char name[32];
    std::snprintf(name, sizeof(name), "session_%03d", i);
    const std::string stem = (fs::path(out_dir) / name).string();
    save_recording(generate_session(spec), stem + ext, fmt);
    save_json(to_json(spec), stem + ".spec.json");
    std::cout << "wrote " << stem << ext << "\n";
  }
  return 0;
}

int run_evaluate(const std::vector<std::string>& inputs,
                 const std::vector<SpatialMethod>& methods, std::size_t folds,
                 std::size_t margin, const PipelineConfig& cfg, const std::string& out_dir,
                 int jobs) {
  if (inputs.empty()) throw CLI::ValidationError("--input", "no session files given");
  fs::create_directories(out_dir);

  struct Task {
    std::string session, method_name, path;
    SpatialMethod method;
  };
  std::vector<Task> tasks;
  for (const auto& path : inputs)
    for (const auto& m : methods) tasks.push_back({session_id(path), to_string(m), path, m});

  std::vector<std::optional<CrossValResult>> results(tasks.size());
  std::vector<std::string> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1)) {
      try {
        const Recording rec = load_recording(tasks[i].path, format_for(tasks[i].path));
        results[i] = cross_validate(rec, tasks[i].method, folds, margin, cfg);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  std::vector<std::future<void>> pool;
  for (int j = 1; j < jobs; ++j) pool.push_back(std::async(std::launch::async, worker));
  worker();
  for (auto& f : pool) f.get();

  EvalReport report;
  for (const auto& m : methods) report.methods.push_back(to_string(m));
  bool any_failed = false;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (!results[i]) {
      std::cerr << "error: " << tasks[i].session << "/" << tasks[i].method_name << ": "
                << errors[i] << "\n";
      any_failed = true;
      continue;
    }
    if (std::find(report.sessions.begin(), report.sessions.end(), tasks[i].session) ==
        report.sessions.end())
      report.sessions.push_back(tasks[i].session);
    report.entries.push_back({tasks[i].session, tasks[i].method_name, *results[i]});
  }
  if (report.entries.empty()) {
    std::cerr << "error: every cross-validation run failed\n";
    return 1;
  }

  write_fold_csv(report, (fs::path(out_dir) / "folds.csv").string());
  if (!any_failed) {
    write_aggregate_csv(report, (fs::path(out_dir) / "aggregate.csv").string());
    save_json(report_to_json(report), (fs::path(out_dir) / "report.json").string());
    std::cout << aggregate_table(report);
  }
  return any_failed ? 1 : 0;
}

int run_compare(const std::vector<std::string>& report_paths, const std::string& out_path) {
  EvalReport merged;
  for (const auto& path : report_paths) {
    const nlohmann::json j = load_json(path);
    for (const auto& m : j.at("methods"))
      if (std::find(merged.methods.begin(), merged.methods.end(), m.get<std::string>()) ==
          merged.methods.end())
        merged.methods.push_back(m.get<std::string>());
    for (const auto& s : j.at("sessions"))
      if (std::find(merged.sessions.begin(), merged.sessions.end(), s.get<std::string>()) ==
          merged.sessions.end())
        merged.sessions.push_back(s.get<std::string>());
    for (const auto& je : j.at("results")) {
      SessionEval e;
      e.session = je.at("session").get<std::string>();
      e.method = je.at("method").get<std::string>();
      e.result.mean_accuracy = je.at("mean_accuracy").get<double>();
      e.result.sd_accuracy = je.at("sd_accuracy").get<double>();
      for (const auto& jf : je.at("folds")) {
        ConfusionMetrics m;
        m.tp = jf.at("tp").get<std::size_t>();
        m.tn = jf.at("tn").get<std::size_t>();
        m.fp = jf.at("fp").get<std::size_t>();
        m.fn = jf.at("fn").get<std::size_t>();
        auto num = [&](const char* k) {
          return jf.at(k).is_null() ? std::numeric_limits<double>::quiet_NaN()
                                    : jf.at(k).get<double>();
        };
        m.accuracy = jf.at("accuracy").get<double>();
        m.tpr = num("tpr");
        m.tnr = num("tnr");
        m.fpr = num("fpr");
        m.fnr = num("fnr");
        e.result.fold_metrics.push_back(m);
      }
      merged.entries.push_back(std::move(e));
    }
  }
  if (merged.methods.size() < 2)
    throw std::invalid_argument("compare: need >= 2 methods across reports");
  if (merged.sessions.size() < 2)
    throw std::invalid_argument("compare: need >= 2 sessions (df = 0 otherwise)");
  // matching session sets: every (session, method) cell must exist
  for (const auto& s : merged.sessions)
    for (const auto& m : merged.methods)
      if (!merged.find(s, m))
        throw std::invalid_argument("compare: mismatched session sets, missing " + s + "/" + m);

  const nlohmann::json stats = compare_methods(merged);
  save_json(stats, out_path);
  for (const auto& [metric, jm] : stats.items())
    std::cout << metric << ": F=" << jm.at("anova").at("f").get<double>()
              << " p=" << jm.at("anova").at("p").get<double>() << "\n";
  return 0;
}

int run_inspect(const std::string& model_path) {
  const PipelineModel m = pipeline_model_from_json(load_json(model_path));
  std::cout << "method: " << to_string(m.spatial.method) << "\n"
            << "band: " << m.config.band_lo_hz << "-" << m.config.band_hi_hz << " Hz\n"
            << "trained fs: " << m.trained_fs_hz << " Hz\n"
            << "channels: " << m.channel_labels.size() << "\n"
            << "bands: " << m.spatial.bands.size() << "\n"
            << "components: " << m.spatial.n_components() << "\n"
            << "lda gamma: " << m.lda.shrinkage_gamma << "\n";
  for (std::size_t b = 0; b < m.spatial.bands.size(); ++b) {
    const auto& band = m.spatial.bands[b];
    std::cout << "  band " << b;
    if (band.filter)
      std::cout << " [" << band.filter->band_hz.first << "," << band.filter->band_hz.second
                << ") Hz";
    else
      std::cout << " [broadband]";
    std::cout << " eigenvalues:";
    for (Eigen::Index i = 0; i < band.eigenvalues.size(); ++i)
      std::cout << " " << band.eigenvalues[i];
    std::cout << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Offline motor-imagery BCI calibration toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Flat key=value config file; flags override file values");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate synthetic EEG sessions");
  int n_sessions = 1;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  std::string synth_format = "csv";
  SynthSpec base;
  synth->add_option("--sessions", n_sessions, "Number of sessions to generate");
  synth->add_option("--seed", seed, "Base seed; session i uses seed + i");
  synth->add_option("--out", out_dir, "Output directory (created if missing)");
  synth->add_option("--format", synth_format, "File format: csv or bin")
      ->check(CLI::IsMember({"csv", "bin"}));
  synth->add_option("--trials", base.n_trials, "Cues per session");
  synth->add_option("--channels", base.n_channels, "Channel count");
  synth->add_option("--modulation", base.sources[0].modulation,
                    "Task modulation depth in [0,1]");
  synth->add_option("--center", base.sources[0].center_hz, "Source center frequency Hz");
  synth->add_option("--bandwidth", base.sources[0].bandwidth_hz, "Source bandwidth Hz");
  synth->add_option("--snr", base.snr_db, "Source-to-noise ratio in dB");
  synth->add_option("--fs", base.fs_hz, "Sampling rate Hz");

  // train
  auto* train = app.add_subcommand("train", "Train one pipeline model");
  std::string train_input, train_method = "fbcsp", train_out = "model.json", train_band;
  PipelineConfig train_cfg;
  train->add_option("--input", train_input, "Session recording file")->required();
  train->add_option("--method", train_method, "speccsp, spoc, fbcsp or csp");
  train->add_option("--out", train_out, "Model output path");
  add_pipeline_flags(train, train_cfg, train_band);

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Cross-validate sessions per method");
  std::vector<std::string> eval_inputs;
  std::vector<std::string> eval_methods = {"speccsp", "spoc", "fbcsp"};
  std::size_t folds = 10, margin = 5;
  int jobs = 1;
  std::string eval_out = "out", eval_band;
  PipelineConfig eval_cfg;
  evaluate->add_option("--input", eval_inputs, "Session recording files")
      ->required()
      ->expected(-1);
  evaluate->add_option("--method", eval_methods, "Methods to evaluate")->delimiter(',');
  evaluate->add_option("--folds", folds, "Cross-validation folds");
  evaluate->add_option("--margin", margin, "Guard margin in trials");
  evaluate->add_option("--jobs", jobs, "Worker threads");
  evaluate->add_option("--out", eval_out, "Report output directory");
  add_pipeline_flags(evaluate, eval_cfg, eval_band);

  // compare
  auto* compare = app.add_subcommand("compare", "Statistical comparison of reports");
  std::vector<std::string> report_paths;
  std::string compare_out = "stats.json";
  compare->add_option("--report", report_paths, "report.json files")->required()->expected(-1);
  compare->add_option("--out", compare_out, "Statistics output path");

  // inspect-model
  auto* inspect = app.add_subcommand("inspect-model", "Print a model summary");
  std::string model_path;
  inspect->add_option("model", model_path, "Model file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (synth->parsed()) return run_synth(out_dir, n_sessions, seed, base, synth_format);
    if (train->parsed()) {
      apply_band(train_band, train_cfg);
      const Recording rec = load_recording(train_input, format_for(train_input));
      const PipelineModel model =
          train_pipeline(rec, spatial_method_from_string(train_method), train_cfg);
      save_json(to_json(model), train_out);
      std::cout << "wrote " << train_out << "\n";
      return 0;
    }
    if (evaluate->parsed()) {
      apply_band(eval_band, eval_cfg);
      return run_evaluate(eval_inputs, parse_methods(eval_methods), folds, margin, eval_cfg,
                          eval_out, jobs < 1 ? 1 : jobs);
    }
    if (compare->parsed()) return run_compare(report_paths, compare_out);
    if (inspect->parsed()) return run_inspect(model_path);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
