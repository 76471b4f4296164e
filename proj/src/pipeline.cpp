#include "quakescan/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <set>
#include <sstream>
#include <thread>
#include <vector>

#include "quakescan/detector.hpp"
#include "quakescan/errors.hpp"
#include "quakescan/features.hpp"
#include "quakescan/model.hpp"
#include "quakescan/preprocess.hpp"
#include "quakescan/rng.hpp"
#include "quakescan/selection.hpp"
#include "quakescan/stats.hpp"
#include "quakescan/synth.hpp"
#include "quakescan/trace.hpp"

namespace quakescan::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Strict flat-key config reader: typed access plus unknown-key detection.
class Config {
 public:
  explicit Config(const json& j) : j_(j) {
    if (!j_.is_object()) throw ConfigError("config must be a JSON object");
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    seen_.insert(key);
    if (!j_.contains(key)) return fallback;
    return as<T>(key);
  }

  template <typename T>
  T require(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ConfigError("missing config key '" + key + "'");
    return as<T>(key);
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  void done() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown config key '" + key + "'");
    }
  }

 private:
  template <typename T>
  T as(const std::string& key) {
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config key '" + key + "' has the wrong type");
    }
  }

  const json& j_;
  std::set<std::string> seen_;
};

void ensure_parent_dir(const std::string& path) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void write_text_file(const std::string& path, const std::string& text) {
  ensure_parent_dir(path);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out << text;
  if (!out) throw DataError("write failed: " + path);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("bad json in " + path + ": " + e.what());
  }
}

BandpassSpec bandpass_from_config(Config& cfg) {
  BandpassSpec spec;
  spec.low_hz = cfg.get<double>("bandpass_low", spec.low_hz);
  spec.high_hz = cfg.get<double>("bandpass_high", spec.high_hz);
  spec.order = cfg.get<int>("bandpass_order", spec.order);
  spec.zero_phase = cfg.get<bool>("zero_phase", spec.zero_phase);
  return spec;
}

SynthSpec synth_spec_from_config(Config& cfg, uint64_t seed) {
  SynthSpec spec;
  spec.rate = cfg.get<double>("rate", spec.rate);
  const std::string noise = cfg.get<std::string>("noise", "white");
  if (noise == "white") spec.noise_model = NoiseModel::white;
  else if (noise == "colored") spec.noise_model = NoiseModel::colored;
  else throw ConfigError("unknown noise model '" + noise + "'");
  spec.colored_exponent = cfg.get<double>("colored_exponent", spec.colored_exponent);
  // Command-level default: ringdown events. A bare Ricker pip is far shorter
  // than a recorded local event, leaving the memory-based features blind.
  const std::string wavelet = cfg.get<std::string>("wavelet", "damped_sine");
  if (wavelet == "ricker") spec.wavelet = WaveletKind::ricker;
  else if (wavelet == "damped_sine") spec.wavelet = WaveletKind::damped_sine;
  else throw ConfigError("unknown wavelet '" + wavelet + "'");
  spec.ricker_center_hz = cfg.get<double>("ricker_center_hz", spec.ricker_center_hz);
  spec.sine_freq_hz = cfg.get<double>("sine_freq_hz", spec.sine_freq_hz);
  spec.sine_decay_s = cfg.get<double>("sine_decay_s", spec.sine_decay_s);
  spec.rng_seed = seed;
  return spec;
}

// Runs fn(i) for i in [0, n) across hardware threads; results must be
// written into index-addressed slots so the order stays deterministic.
template <typename Fn>
void parallel_for(size_t n, Fn fn) {
  const size_t n_threads =
      std::min<size_t>(std::max(1u, std::thread::hardware_concurrency()), n);
  if (n_threads <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> workers;
  std::atomic<size_t> next{0};
  for (size_t t = 0; t < n_threads; ++t) {
    workers.emplace_back([&] {
      for (;;) {
        const size_t i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (auto& w : workers) w.join();
}

Trace window_to_trace(const Window& w) {
  Trace t;
  t.station_id = w.station_id;
  t.channel = w.channel;
  t.start_time = w.start_time;
  t.sampling_rate = w.sampling_rate;
  t.samples = w.samples;
  return t;
}

}  // namespace

json run_synth(const json& config) {
  Config cfg(config);
  const std::string mode = cfg.require<std::string>("mode");
  const std::string out_dir = cfg.require<std::string>("out_dir");
  const uint64_t seed = cfg.get<uint64_t>("seed", 0);
  const std::string format_name = cfg.get<std::string>("format", "binary");
  const TraceFormat format =
      format_name == "csv" ? TraceFormat::csv : TraceFormat::binary;
  if (format_name != "csv" && format_name != "binary") {
    throw ConfigError("unknown trace format '" + format_name + "'");
  }
  const std::string ext = format == TraceFormat::csv ? ".csv" : ".bin";
  SynthSpec base = synth_spec_from_config(cfg, seed);

  fs::create_directories(out_dir);
  json summary;
  summary["command"] = "synth";
  summary["mode"] = mode;
  summary["out_dir"] = out_dir;
  summary["seed"] = seed;

  if (mode == "corpus") {
    const int n_event = cfg.get<int>("n_event", 200);
    const int n_noise = cfg.get<int>("n_noise", 300);
    const double snr_min = cfg.get<double>("snr_min", 2.0);
    const double snr_max = cfg.get<double>("snr_max", 10.0);
    const double window_s = cfg.get<double>("window_s", 20.0);
    cfg.done();
    if (n_event < 0 || n_noise < 0) throw ConfigError("window counts must be >= 0");
    if (!(snr_min > 0.0) || snr_max < snr_min) throw ConfigError("bad snr range");

    Rng rng(seed);
    std::ostringstream index;
    index << "file,label\n";
    int file_no = 0;
    for (int i = 0; i < n_event; ++i) {
      SynthSpec spec = base;
      spec.rng_seed = rng.next_u64();
      spec.snr = rng.next_in(snr_min, snr_max);
      const double onset = rng.next_in(0.3, 0.7) * window_s;
      Window w = make_event_window(spec, window_s, onset);
      w.start_time = static_cast<double>(file_no) * window_s;
      char name[32];
      std::snprintf(name, sizeof(name), "event_%04d%s", i, ext.c_str());
      save_trace(window_to_trace(w), (fs::path(out_dir) / name).string(), format);
      index << name << ",event\n";
      ++file_no;
    }
    for (int i = 0; i < n_noise; ++i) {
      SynthSpec spec = base;
      spec.rng_seed = rng.next_u64();
      spec.snr = 1.0;  // unused for noise
      Window w = make_noise_window(spec, window_s);
      w.start_time = static_cast<double>(file_no) * window_s;
      char name[32];
      std::snprintf(name, sizeof(name), "noise_%04d%s", i, ext.c_str());
      save_trace(window_to_trace(w), (fs::path(out_dir) / name).string(), format);
      index << name << ",noise\n";
      ++file_no;
    }
    const std::string index_path = (fs::path(out_dir) / "windows.csv").string();
    write_text_file(index_path, index.str());
    summary["n_event"] = n_event;
    summary["n_noise"] = n_noise;
    summary["index"] = index_path;
    return summary;
  }

  if (mode == "continuous") {
    const double duration_s = cfg.get<double>("duration_s", 14400.0);
    const int n_stations = cfg.get<int>("n_stations", 5);
    base.snr = cfg.get<double>("snr", 8.0);
    const auto event_times = cfg.get<std::vector<double>>("event_times", {});
    const auto moveout_s = cfg.get<std::vector<double>>("moveout_s", {});
    cfg.done();

    const ContinuousRecord rec =
        make_continuous(base, duration_s, event_times, n_stations, moveout_s);
    json trace_paths = json::array();
    for (const auto& t : rec.traces) {
      const std::string path =
          (fs::path(out_dir) / ("station_" + t.station_id + ext)).string();
      save_trace(t, path, format);
      trace_paths.push_back(path);
    }
    const std::string catalog_path = (fs::path(out_dir) / "truth.csv").string();
    save_catalog(rec.truth, catalog_path);
    summary["traces"] = trace_paths;
    summary["catalog"] = catalog_path;
    summary["n_events"] = event_times.size();
    summary["n_stations"] = n_stations;
    return summary;
  }

  throw ConfigError("unknown synth mode '" + mode + "'");
}

json run_extract(const json& config) {
  Config cfg(config);
  const std::string out_matrix = cfg.require<std::string>("out_matrix");
  const std::string out_report =
      cfg.get<std::string>("out_report", out_matrix + ".norm.json");
  const double window_s = cfg.get<double>("window_s", 20.0);
  const double guard_s = cfg.get<double>("guard_s", 60.0);
  const uint64_t seed = cfg.get<uint64_t>("seed", 0);
  const BandpassSpec bandpass = bandpass_from_config(cfg);
  std::vector<std::string> features =
      cfg.get<std::vector<std::string>>("features", all_feature_names());

  SurpriseSpec surprise;
  surprise.rng_seed = seed;

  // Gather labeled windows from either a window directory or traces+catalog.
  std::vector<Window> windows;
  if (cfg.has("window_dir")) {
    const std::string dir = cfg.require<std::string>("window_dir");
    cfg.done();
    const std::string index_path = (fs::path(dir) / "windows.csv").string();
    std::ifstream in(index_path);
    if (!in) throw DataError("cannot open window index: " + index_path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty window index");
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const auto comma = line.find(',');
      if (comma == std::string::npos) {
        throw DataError("malformed window index row '" + line + "'");
      }
      const std::string file = line.substr(0, comma);
      const Label label = label_from_string(line.substr(comma + 1));
      const std::string path = (fs::path(dir) / file).string();
      const Trace t = load_trace(path, trace_format_for_path(path));
      Window w;
      w.station_id = t.station_id;
      w.channel = t.channel;
      w.start_time = t.start_time;
      w.sampling_rate = t.sampling_rate;
      w.samples = t.samples;
      w.label = label;
      windows.push_back(std::move(w));
    }
  } else {
    const auto trace_paths = cfg.require<std::vector<std::string>>("traces");
    const std::string catalog_path = cfg.require<std::string>("catalog");
    cfg.done();
    const Catalog catalog = load_catalog(catalog_path);
    for (const auto& path : trace_paths) {
      const Trace t = load_trace(path, trace_format_for_path(path));
      auto labeled = label_windows(t, catalog, window_s, guard_s);
      for (auto& w : labeled) windows.push_back(std::move(w));
    }
  }
  if (windows.empty()) throw DataError("no usable windows");

  // Preprocess and extract per window, in parallel; slots keep the order.
  std::vector<FeatureVector> vectors(windows.size());
  std::vector<double> starts(windows.size());
  std::vector<Label> labels(windows.size());
  parallel_for(windows.size(), [&](size_t i) {
    starts[i] = windows[i].start_time;
    labels[i] = windows[i].label;
    try {
      const Window pre = preprocess_window(windows[i], bandpass);
      vectors[i] = extract_features(pre, features, surprise);
    } catch (const DataError&) {
      vectors[i].usable = false;
    }
  });

  MatrixBuildReport build_report;
  const FeatureMatrix matrix =
      matrix_from_windows(starts, labels, vectors, &build_report);
  ensure_parent_dir(out_matrix);
  save_matrix_csv(matrix, out_matrix);

  NormalizeReport norm_report;
  const FeatureMatrix normalized = normalize_matrix(matrix, &norm_report);

  size_t n_event = 0, n_noise = 0;
  for (Label l : matrix.labels) {
    if (l == Label::event) ++n_event;
    else if (l == Label::noise) ++n_noise;
  }

  json report;
  report["norm_params"] = json::object();
  for (size_t j = 0; j < normalized.n_features(); ++j) {
    report["norm_params"][normalized.feature_names[j]] = {
        {"median", normalized.norm_params[j].median},
        {"iqr", normalized.norm_params[j].iqr}};
  }
  report["dropped_constant"] = norm_report.dropped_constant;
  report["dropped_nonfinite"] = build_report.dropped_columns;
  report["n_rows_in"] = build_report.n_rows_in;
  report["n_rows_dropped"] = build_report.n_rows_dropped;
  report["n_event"] = n_event;
  report["n_noise"] = n_noise;
  report["seed"] = seed;
  write_text_file(out_report, report.dump(2) + "\n");

  json summary;
  summary["command"] = "extract";
  summary["matrix"] = out_matrix;
  summary["report"] = out_report;
  summary["n_rows"] = matrix.n_rows();
  summary["n_features"] = matrix.n_features();
  summary["n_event"] = n_event;
  summary["n_noise"] = n_noise;
  summary["n_rows_dropped"] = build_report.n_rows_dropped;
  summary["seed"] = seed;
  return summary;
}

json run_rank(const json& config) {
  Config cfg(config);
  const std::string matrix_path = cfg.require<std::string>("matrix");
  const std::string out_report = cfg.require<std::string>("out_report");
  const size_t top_k = cfg.get<size_t>("top_k", 50);
  const double r_max = cfg.get<double>("r_max", 0.8);
  const uint64_t seed = cfg.get<uint64_t>("seed", 0);
  cfg.done();

  const FeatureMatrix raw = load_matrix_csv(matrix_path);
  NormalizeReport norm_report;
  const FeatureMatrix normalized = normalize_matrix(raw, &norm_report);
  const auto ranking = rank_features(normalized);
  const auto kept = prune_correlated(normalized, ranking, top_k, r_max);

  std::set<std::string> kept_set(kept.begin(), kept.end());
  json report;
  report["seed"] = seed;
  report["top_k"] = top_k;
  report["r_max"] = r_max;
  report["dropped_constant"] = norm_report.dropped_constant;
  report["ranking"] = json::array();
  for (size_t i = 0; i < ranking.size(); ++i) {
    const auto& r = ranking[i];
    report["ranking"].push_back(
        {{"rank", i + 1},
         {"name", r.name},
         {"accuracy", r.single_feature_accuracy},
         {"threshold", r.threshold},
         {"polarity", r.polarity == Polarity::ge ? ">=" : "<"},
         {"kept", kept_set.count(r.name) > 0}});
  }
  report["kept"] = kept;

  // pairwise |r| over the top_k ranked features
  const size_t limit = std::min(top_k, ranking.size());
  json corr_names = json::array();
  std::vector<std::vector<double>> cols;
  for (size_t i = 0; i < limit; ++i) {
    corr_names.push_back(ranking[i].name);
    cols.push_back(normalized.column(normalized.feature_index(ranking[i].name)));
  }
  json abs_r = json::array();
  for (size_t i = 0; i < limit; ++i) {
    json row = json::array();
    for (size_t j = 0; j < limit; ++j) {
      row.push_back(i == j ? 1.0 : std::abs(stats::pearson(cols[i], cols[j])));
    }
    abs_r.push_back(row);
  }
  report["correlation"] = {{"names", corr_names}, {"abs_r", abs_r}};
  write_text_file(out_report, report.dump(2) + "\n");

  json summary;
  summary["command"] = "rank";
  summary["report"] = out_report;
  summary["n_ranked"] = ranking.size();
  summary["kept"] = kept;
  summary["seed"] = seed;
  return summary;
}

json run_train(const json& config) {
  Config cfg(config);
  const std::string matrix_path = cfg.require<std::string>("matrix");
  const std::string out_model = cfg.require<std::string>("out_model");
  const uint64_t seed = cfg.get<uint64_t>("seed", 0);

  std::vector<std::string> features;
  if (cfg.has("features")) {
    features = cfg.require<std::vector<std::string>>("features");
  } else if (cfg.has("selection_report")) {
    const json report = read_json_file(cfg.require<std::string>("selection_report"));
    const auto kept = report.at("kept").get<std::vector<std::string>>();
    if (kept.size() < 4) throw DataError("selection kept fewer than 4 features");
    features.assign(kept.begin(), kept.begin() + 4);
  } else {
    for (const char* n : kSelectedFeatures) features.emplace_back(n);
  }
  if (features.size() != 4) throw ConfigError("train takes exactly 4 features");

  SplitSpec split_spec;
  split_spec.train_fraction = cfg.get<double>("train_fraction", 0.7);
  split_spec.stratified = cfg.get<bool>("stratified", true);
  split_spec.seed = seed;

  Hyper hyper;
  hyper.learning_rate = cfg.get<double>("learning_rate", hyper.learning_rate);
  hyper.max_iters = cfg.get<int>("max_iters", hyper.max_iters);
  hyper.tol = cfg.get<double>("tol", hyper.tol);
  hyper.l2 = cfg.get<double>("l2", hyper.l2);
  const double threshold = cfg.get<double>("threshold", 0.5);
  const double trained_at = cfg.get<double>("trained_at", 0.0);
  cfg.done();

  const FeatureMatrix raw = load_matrix_csv(matrix_path).select_features(features);
  const auto [train_raw, test_raw] = split(raw, split_spec);

  NormalizeReport norm_report;
  const FeatureMatrix train_norm = normalize_matrix(train_raw, &norm_report);
  if (!norm_report.dropped_constant.empty()) {
    throw DataError("selected feature '" + norm_report.dropped_constant.front() +
                    "' is constant on the training split");
  }
  const FeatureMatrix test_norm =
      apply_normalization(test_raw, train_norm.norm_params);

  LogRegModel model = train(train_norm, hyper);
  model.trained_at = trained_at;
  ensure_parent_dir(out_model);
  save_model(model, out_model);

  const EvalResult train_eval = evaluate(model, train_norm, threshold);
  const EvalResult test_eval = evaluate(model, test_norm, threshold);

  json summary;
  summary["command"] = "train";
  summary["model"] = out_model;
  summary["features"] = features;
  summary["train_accuracy"] = train_eval.accuracy;
  summary["test_accuracy"] = test_eval.accuracy;
  summary["n_train"] = train_norm.n_rows();
  summary["n_test"] = test_norm.n_rows();
  summary["iterations"] = model.diagnostics.iterations;
  summary["converged"] = model.diagnostics.converged;
  summary["final_loss"] = model.diagnostics.final_loss;
  summary["seed"] = seed;
  return summary;
}

json run_scan(const json& config) {
  Config cfg(config);
  const std::string model_path = cfg.require<std::string>("model_path");
  const auto trace_paths = cfg.require<std::vector<std::string>>("traces");
  ScanConfig scan_cfg;
  scan_cfg.window_s = cfg.get<double>("window_s", scan_cfg.window_s);
  scan_cfg.step_s = cfg.get<double>("step_s", scan_cfg.step_s);
  scan_cfg.threshold = cfg.get<double>("threshold", scan_cfg.threshold);
  scan_cfg.min_stations = cfg.get<int>("min_stations", scan_cfg.min_stations);
  scan_cfg.slack_windows = cfg.get<int>("slack_windows", scan_cfg.slack_windows);
  scan_cfg.bandpass = bandpass_from_config(cfg);
  const uint64_t seed = cfg.get<uint64_t>("seed", 0);
  scan_cfg.surprise.rng_seed = seed;
  const std::string format_name = cfg.get<std::string>("report_format", "text");
  const ReportFormat format = report_format_from_string(format_name);
  const std::string report_path = cfg.get<std::string>("report_path", "");
  const bool log_single_flags = cfg.get<bool>("log_single_flags", true);
  cfg.done();

  if (trace_paths.empty()) throw ConfigError("scan needs at least one trace");
  const LogRegModel model = load_model(model_path);

  std::vector<Trace> traces;
  traces.reserve(trace_paths.size());
  for (const auto& path : trace_paths) {
    traces.push_back(load_trace(path, trace_format_for_path(path)));
  }

  // Stations scan independently; the vote joins them in input order.
  std::vector<std::future<StationScan>> futures;
  futures.reserve(traces.size());
  for (const auto& t : traces) {
    futures.push_back(std::async(std::launch::async, [&model, &scan_cfg, &t] {
      return scan_station(t, model, scan_cfg);
    }));
  }
  std::vector<StationScan> scans;
  scans.reserve(traces.size());
  for (auto& f : futures) scans.push_back(f.get());

  const VoteResult result = vote(scans, scan_cfg);
  const std::string report = format_report(result, format, log_single_flags);
  if (!report_path.empty()) write_text_file(report_path, report);

  size_t n_degenerate = 0;
  for (const auto& s : scans) n_degenerate += s.n_degenerate;

  json summary;
  summary["command"] = "scan";
  summary["n_detections"] = result.detections.size();
  summary["n_single_flags"] = result.single_flags.size();
  summary["n_windows"] = scans.empty() ? 0 : scans.front().scores.size();
  summary["n_stations"] = scans.size();
  summary["degenerate_windows"] = n_degenerate;
  summary["seed"] = seed;
  if (!report_path.empty()) {
    summary["report"] = report_path;
  } else {
    summary["report_text"] = report;
  }
  return summary;
}

json run_eval(const json& config) {
  Config cfg(config);
  const std::string matrix_path = cfg.require<std::string>("matrix");
  const std::string model_path = cfg.require<std::string>("model_path");
  const double threshold = cfg.get<double>("threshold", 0.5);
  const std::string out_path = cfg.get<std::string>("out", "");
  const uint64_t seed = cfg.get<uint64_t>("seed", 0);  // unused; echoed
  cfg.done();

  const LogRegModel model = load_model(model_path);
  const FeatureMatrix raw =
      load_matrix_csv(matrix_path).select_features(model.feature_names);
  const FeatureMatrix normalized = apply_normalization(raw, model.norm_params);
  const EvalResult r = evaluate(model, normalized, threshold);

  json summary;
  summary["command"] = "eval";
  summary["seed"] = seed;
  summary["n_rows"] = normalized.n_rows();
  summary["accuracy"] = r.accuracy;
  summary["precision"] = r.precision;
  summary["recall"] = r.recall;
  summary["tp"] = r.tp;
  summary["fp"] = r.fp;
  summary["tn"] = r.tn;
  summary["fn"] = r.fn;
  summary["threshold"] = threshold;
  if (!out_path.empty()) {
    write_text_file(out_path, summary.dump(2) + "\n");
    summary["report"] = out_path;
  }
  return summary;
}

json run_command(const std::string& command, const json& config) {
  if (command == "synth") return run_synth(config);
  if (command == "extract") return run_extract(config);
  if (command == "rank") return run_rank(config);
  if (command == "train") return run_train(config);
  if (command == "scan") return run_scan(config);
  if (command == "eval") return run_eval(config);
  throw ConfigError("unknown command '" + command + "'");
}

}  // namespace quakescan::pipeline
