// quakescan command-line frontend. Subcommands assemble a flat-key JSON
// config (defaults < --config file < explicit flags) and drive the shared
// library through its C API.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "quakescan.h"

namespace {

using nlohmann::json;

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "error: cannot open config file: " << path << "\n";
    std::exit(2);
  }
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    std::cerr << "error: bad config json in " << path << ": " << e.what() << "\n";
    std::exit(2);
  }
}

// Sets cfg[key] = value when the user passed the flag, or when neither the
// flag nor the config file provided the key (so defaults are explicit).
template <typename T>
void fill_key(json& cfg, const CLI::Option* opt, const std::string& key,
              const T& value) {
  if (opt->count() > 0 || !cfg.contains(key)) cfg[key] = value;
}

// Sets cfg[key] only when the user passed the flag explicitly.
template <typename T>
void fill_optional(json& cfg, const CLI::Option* opt, const std::string& key,
                   const T& value) {
  if (opt->count() > 0) cfg[key] = value;
}

void print_summary(const json& summary, bool verbose) {
  if (summary.contains("seed")) {
    std::cout << "seed=" << summary["seed"].dump() << "\n";
  }
  for (const auto& [key, value] : summary.items()) {
    if (key == "seed" || key == "report_text") continue;
    if (value.is_primitive()) {
      std::cout << key << "=" << (value.is_string() ? value.get<std::string>()
                                                    : value.dump())
                << "\n";
    } else if (value.is_array()) {
      std::string joined;
      bool simple = true;
      for (const auto& v : value) {
        if (!v.is_primitive()) {
          simple = false;
          break;
        }
        if (!joined.empty()) joined += ",";
        joined += v.is_string() ? v.get<std::string>() : v.dump();
      }
      if (simple) std::cout << key << "=" << joined << "\n";
    }
  }
  if (summary.contains("report_text")) {
    std::cout << summary["report_text"].get<std::string>();
  }
  if (verbose) std::cout << summary.dump(2) << "\n";
}

using RunFn = qs_status (*)(const char*, char**);

int run(RunFn fn, const json& cfg, bool verbose) {
  if (verbose) std::cerr << "config: " << cfg.dump(2) << "\n";
  char* summary_text = nullptr;
  const qs_status status = fn(cfg.dump().c_str(), &summary_text);
  if (status != QS_OK) {
    std::cerr << "error: " << qs_last_error() << "\n";
    return static_cast<int>(status);
  }
  if (summary_text != nullptr) {
    print_summary(json::parse(summary_text), verbose);
    qs_string_free(summary_text);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quakescan: low-magnitude seismic event detection via "
               "time-series features and logistic regression"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  uint64_t seed = 0;
  bool verbose = false;
  app.add_option("--config", config_path, "JSON config file with flat keys");
  auto* seed_opt = app.add_option("--seed", seed, "Seed for all randomized steps");
  app.add_flag("--verbose", verbose, "Print full config and summary JSON");

  // ---- synth ----
  auto* synth = app.add_subcommand("synth", "Generate synthetic data");
  std::string sy_mode = "corpus", sy_out = "synth_out", sy_noise = "white";
  std::string sy_wavelet = "damped_sine", sy_format = "binary";
  double sy_rate = 200.0, sy_exp = 1.0, sy_center = 12.0, sy_freq = 12.0;
  double sy_decay = 1.5, sy_window = 20.0, sy_snr_min = 2.0, sy_snr_max = 10.0;
  double sy_duration = 14400.0, sy_snr = 8.0;
  int sy_n_event = 200, sy_n_noise = 300, sy_stations = 5;
  std::vector<double> sy_events, sy_moveout;
  auto* o_mode = synth->add_option("--mode", sy_mode, "corpus or continuous");
  auto* o_out = synth->add_option("--out-dir", sy_out, "Output directory");
  auto* o_rate = synth->add_option("--rate", sy_rate, "Sampling rate [Hz]");
  auto* o_noise = synth->add_option("--noise", sy_noise, "white or colored");
  auto* o_exp = synth->add_option("--colored-exponent", sy_exp, "1/f^a exponent");
  auto* o_wav = synth->add_option("--wavelet", sy_wavelet, "ricker or damped_sine");
  auto* o_center = synth->add_option("--ricker-center-hz", sy_center, "");
  auto* o_freq = synth->add_option("--sine-freq-hz", sy_freq, "");
  auto* o_decay = synth->add_option("--sine-decay-s", sy_decay, "");
  auto* o_fmt = synth->add_option("--format", sy_format, "binary or csv");
  auto* o_window = synth->add_option("--window-s", sy_window, "Window length [s]");
  auto* o_nev = synth->add_option("--n-event", sy_n_event, "Corpus event windows");
  auto* o_nno = synth->add_option("--n-noise", sy_n_noise, "Corpus noise windows");
  auto* o_smin = synth->add_option("--snr-min", sy_snr_min, "");
  auto* o_smax = synth->add_option("--snr-max", sy_snr_max, "");
  auto* o_dur = synth->add_option("--duration-s", sy_duration, "Record length [s]");
  auto* o_nst = synth->add_option("--n-stations", sy_stations, "");
  auto* o_ssnr = synth->add_option("--snr", sy_snr, "Continuous-mode event SNR");
  auto* o_times = synth->add_option("--event-times", sy_events, "Origin times [s]");
  auto* o_move = synth->add_option("--moveout-s", sy_moveout, "Per-station delays");

  // ---- extract ----
  auto* extract = app.add_subcommand("extract", "Windows to feature matrix");
  std::string ex_window_dir, ex_catalog, ex_matrix = "matrix.csv", ex_report;
  std::vector<std::string> ex_traces, ex_features;
  double ex_window = 20.0, ex_guard = 60.0, ex_low = 5.0, ex_high = 25.0;
  int ex_order = 4;
  bool ex_zero_phase = true;
  auto* e_wdir = extract->add_option("--window-dir", ex_window_dir,
                                     "Directory with windows.csv index");
  auto* e_traces = extract->add_option("--traces", ex_traces, "Trace files");
  auto* e_cat = extract->add_option("--catalog", ex_catalog, "Catalog CSV");
  auto* e_mat = extract->add_option("--out-matrix", ex_matrix, "Output matrix CSV");
  auto* e_rep = extract->add_option("--out-report", ex_report, "Normalization report");
  auto* e_win = extract->add_option("--window-s", ex_window, "");
  auto* e_guard = extract->add_option("--guard-s", ex_guard, "");
  auto* e_feat = extract->add_option("--features", ex_features, "Feature names");
  auto* e_low = extract->add_option("--bandpass-low", ex_low, "");
  auto* e_high = extract->add_option("--bandpass-high", ex_high, "");
  auto* e_order = extract->add_option("--bandpass-order", ex_order, "");
  auto* e_zp = extract->add_option("--zero-phase", ex_zero_phase, "");

  // ---- rank ----
  auto* rank = app.add_subcommand("rank", "Rank and prune features");
  std::string rk_matrix, rk_report = "selection.json";
  size_t rk_top_k = 50;
  double rk_r_max = 0.8;
  auto* r_mat = rank->add_option("--matrix", rk_matrix, "Feature matrix CSV");
  auto* r_rep = rank->add_option("--out-report", rk_report, "Selection report JSON");
  auto* r_topk = rank->add_option("--top-k", rk_top_k, "");
  auto* r_rmax = rank->add_option("--r-max", rk_r_max, "");

  // ---- train ----
  auto* train = app.add_subcommand("train", "Train the logistic regression");
  std::string tr_matrix, tr_model = "model.json", tr_selection;
  std::vector<std::string> tr_features;
  double tr_frac = 0.7, tr_lr = 0.5, tr_tol = 1e-8, tr_l2 = 1e-6;
  double tr_threshold = 0.5, tr_trained_at = 0.0;
  int tr_iters = 5000;
  bool tr_strat = true;
  auto* t_mat = train->add_option("--matrix", tr_matrix, "Feature matrix CSV");
  auto* t_model = train->add_option("--out-model", tr_model, "Model JSON path");
  auto* t_feat = train->add_option("--features", tr_features, "Exactly 4 names");
  auto* t_sel = train->add_option("--selection-report", tr_selection,
                                  "Take the top 4 kept features from this report");
  auto* t_frac = train->add_option("--train-fraction", tr_frac, "");
  auto* t_strat = train->add_option("--stratified", tr_strat, "");
  auto* t_lr = train->add_option("--learning-rate", tr_lr, "");
  auto* t_iters = train->add_option("--max-iters", tr_iters, "");
  auto* t_tol = train->add_option("--tol", tr_tol, "");
  auto* t_l2 = train->add_option("--l2", tr_l2, "");
  auto* t_thr = train->add_option("--threshold", tr_threshold, "");
  auto* t_at = train->add_option("--trained-at", tr_trained_at,
                                 "Epoch seconds stored in the model file");

  // ---- scan ----
  auto* scan = app.add_subcommand("scan", "Scan continuous records and vote");
  std::string sc_manifest, sc_model, sc_format = "text", sc_report;
  std::vector<std::string> sc_traces;
  double sc_window = 20.0, sc_step = 20.0, sc_threshold = 0.5;
  int sc_min_stations = 2, sc_slack = 0;
  bool sc_log_single = true;
  scan->add_option("--manifest", sc_manifest, "Manifest JSON (same as --config)");
  auto* s_model = scan->add_option("--model", sc_model, "Model JSON path");
  auto* s_traces = scan->add_option("--traces", sc_traces, "Station trace files");
  auto* s_win = scan->add_option("--window-s", sc_window, "");
  auto* s_step = scan->add_option("--step-s", sc_step, "");
  auto* s_thr = scan->add_option("--threshold", sc_threshold, "");
  auto* s_min = scan->add_option("--min-stations", sc_min_stations, "");
  auto* s_slack = scan->add_option("--slack-windows", sc_slack, "");
  auto* s_fmt = scan->add_option("--format", sc_format, "text, csv, or json");
  auto* s_rep = scan->add_option("--report", sc_report, "Report output path");
  auto* s_single = scan->add_option("--log-single-flags", sc_log_single,
                                    "Include below-quorum flags in the report");

  // ---- eval ----
  auto* eval = app.add_subcommand("eval", "Evaluate a model on a matrix");
  std::string ev_matrix, ev_model, ev_out;
  double ev_threshold = 0.5;
  auto* v_mat = eval->add_option("--matrix", ev_matrix, "Feature matrix CSV");
  auto* v_model = eval->add_option("--model", ev_model, "Model JSON path");
  auto* v_thr = eval->add_option("--threshold", ev_threshold, "");
  auto* v_out = eval->add_option("--out", ev_out, "Metrics JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  json cfg = json::object();
  if (!config_path.empty()) cfg = load_config_file(config_path);
  if (scan->parsed() && !sc_manifest.empty()) cfg = load_config_file(sc_manifest);
  fill_key(cfg, seed_opt, "seed", seed);

  if (synth->parsed()) {
    fill_key(cfg, o_mode, "mode", sy_mode);
    fill_key(cfg, o_out, "out_dir", sy_out);
    fill_key(cfg, o_rate, "rate", sy_rate);
    fill_key(cfg, o_noise, "noise", sy_noise);
    fill_key(cfg, o_exp, "colored_exponent", sy_exp);
    fill_key(cfg, o_wav, "wavelet", sy_wavelet);
    fill_key(cfg, o_center, "ricker_center_hz", sy_center);
    fill_key(cfg, o_freq, "sine_freq_hz", sy_freq);
    fill_key(cfg, o_decay, "sine_decay_s", sy_decay);
    fill_key(cfg, o_fmt, "format", sy_format);
    const bool corpus = cfg.value("mode", sy_mode) == "corpus";
    if (corpus) {
      fill_key(cfg, o_window, "window_s", sy_window);
      fill_key(cfg, o_nev, "n_event", sy_n_event);
      fill_key(cfg, o_nno, "n_noise", sy_n_noise);
      fill_key(cfg, o_smin, "snr_min", sy_snr_min);
      fill_key(cfg, o_smax, "snr_max", sy_snr_max);
    } else {
      fill_key(cfg, o_dur, "duration_s", sy_duration);
      fill_key(cfg, o_nst, "n_stations", sy_stations);
      fill_key(cfg, o_ssnr, "snr", sy_snr);
      fill_key(cfg, o_times, "event_times", sy_events);
      fill_optional(cfg, o_move, "moveout_s", sy_moveout);
    }
    return run(&qs_run_synth, cfg, verbose);
  }

  if (extract->parsed()) {
    fill_optional(cfg, e_wdir, "window_dir", ex_window_dir);
    fill_optional(cfg, e_traces, "traces", ex_traces);
    fill_optional(cfg, e_cat, "catalog", ex_catalog);
    fill_key(cfg, e_mat, "out_matrix", ex_matrix);
    fill_optional(cfg, e_rep, "out_report", ex_report);
    fill_key(cfg, e_win, "window_s", ex_window);
    fill_key(cfg, e_guard, "guard_s", ex_guard);
    fill_optional(cfg, e_feat, "features", ex_features);
    fill_key(cfg, e_low, "bandpass_low", ex_low);
    fill_key(cfg, e_high, "bandpass_high", ex_high);
    fill_key(cfg, e_order, "bandpass_order", ex_order);
    fill_key(cfg, e_zp, "zero_phase", ex_zero_phase);
    return run(&qs_run_extract, cfg, verbose);
  }

  if (rank->parsed()) {
    fill_key(cfg, r_mat, "matrix", rk_matrix);
    fill_key(cfg, r_rep, "out_report", rk_report);
    fill_key(cfg, r_topk, "top_k", rk_top_k);
    fill_key(cfg, r_rmax, "r_max", rk_r_max);
    return run(&qs_run_rank, cfg, verbose);
  }

  if (train->parsed()) {
    fill_key(cfg, t_mat, "matrix", tr_matrix);
    fill_key(cfg, t_model, "out_model", tr_model);
    fill_optional(cfg, t_feat, "features", tr_features);
    fill_optional(cfg, t_sel, "selection_report", tr_selection);
    fill_key(cfg, t_frac, "train_fraction", tr_frac);
    fill_key(cfg, t_strat, "stratified", tr_strat);
    fill_key(cfg, t_lr, "learning_rate", tr_lr);
    fill_key(cfg, t_iters, "max_iters", tr_iters);
    fill_key(cfg, t_tol, "tol", tr_tol);
    fill_key(cfg, t_l2, "l2", tr_l2);
    fill_key(cfg, t_thr, "threshold", tr_threshold);
    fill_key(cfg, t_at, "trained_at", tr_trained_at);
    return run(&qs_run_train, cfg, verbose);
  }

  if (scan->parsed()) {
    fill_optional(cfg, s_model, "model_path", sc_model);
    fill_optional(cfg, s_traces, "traces", sc_traces);
    fill_key(cfg, s_win, "window_s", sc_window);
    fill_key(cfg, s_step, "step_s", sc_step);
    fill_key(cfg, s_thr, "threshold", sc_threshold);
    fill_key(cfg, s_min, "min_stations", sc_min_stations);
    fill_key(cfg, s_slack, "slack_windows", sc_slack);
    fill_key(cfg, s_fmt, "report_format", sc_format);
    fill_optional(cfg, s_rep, "report_path", sc_report);
    fill_key(cfg, s_single, "log_single_flags", sc_log_single);
    return run(&qs_run_scan, cfg, verbose);
  }

  if (eval->parsed()) {
    fill_key(cfg, v_mat, "matrix", ev_matrix);
    fill_key(cfg, v_model, "model_path", ev_model);
    fill_key(cfg, v_thr, "threshold", ev_threshold);
    fill_optional(cfg, v_out, "out", ev_out);
    return run(&qs_run_eval, cfg, verbose);
  }

  std::cerr << "error: no subcommand\n";
  return 2;
}
