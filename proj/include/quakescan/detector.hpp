#pragma once

#include <string>
#include <vector>

#include "quakescan/features.hpp"
#include "quakescan/model.hpp"
#include "quakescan/preprocess.hpp"
#include "quakescan/trace.hpp"

namespace quakescan {

struct ScanConfig {
  double window_s = 20.0;
  double step_s = 20.0;
  double threshold = 0.5;
  int min_stations = 2;
  int slack_windows = 0;  // vote strictly within the same window by default
  BandpassSpec bandpass;
  SurpriseSpec surprise;
};

struct WindowScore {
  double window_start = 0.0;
  double probability = 0.0;
  bool degenerate = false;
};

struct StationScan {
  std::string station_id;
  std::vector<WindowScore> scores;
  size_t n_degenerate = 0;
};

// preprocess -> extract the model's four features -> normalize with the
// model's parameters -> predict, per window. Degenerate windows score
// probability 0 and are counted, never fatal.
StationScan scan_station(const Trace& trace, const LogRegModel& model,
                         const ScanConfig& cfg);

struct StationProb {
  std::string station_id;
  double probability = 0.0;
};

struct Detection {
  double window_start = 0.0;
  std::vector<StationProb> stations;  // stations at or above threshold
  int n_stations = 0;
};

struct VoteResult {
  std::vector<Detection> detections;    // quorum reached
  std::vector<Detection> single_flags;  // flagged but below quorum
};

// Counts stations at or above threshold per shared grid window; emits a
// detection when the count reaches min_stations. All stations must share an
// identical window grid.
VoteResult vote(const std::vector<StationScan>& stations, const ScanConfig& cfg);

enum class ReportFormat { text, csv, json };

ReportFormat report_format_from_string(const std::string& s);

// Table-shaped report: HH:MM:SS window start plus station count; the json
// format carries per-station probabilities as well.
std::string format_report(const VoteResult& result, ReportFormat format,
                          bool log_single_flags);

// Parses the detections out of a json report (round-trip counterpart).
std::vector<Detection> detections_from_json(const std::string& text);

// Epoch seconds -> HH:MM:SS (UTC time of day).
std::string format_hhmmss(double epoch_s);

}  // namespace quakescan
