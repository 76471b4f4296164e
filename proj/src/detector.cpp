#include "quakescan/detector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "json.hpp"
#include "quakescan/errors.hpp"

namespace quakescan {

namespace {

constexpr double kGridTolerance = 1e-6;  // seconds

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

nlohmann::json detection_to_json(const Detection& d) {
  nlohmann::json stations = nlohmann::json::array();
  for (const auto& s : d.stations) {
    stations.push_back({{"station_id", s.station_id},
                        {"probability", s.probability}});
  }
  return {{"window_start", d.window_start},
          {"window_start_hhmmss", format_hhmmss(d.window_start)},
          {"n_stations", d.n_stations},
          {"stations", stations}};
}

Detection detection_from_json(const nlohmann::json& j) {
  Detection d;
  d.window_start = j.at("window_start").get<double>();
  d.n_stations = j.at("n_stations").get<int>();
  for (const auto& s : j.at("stations")) {
    d.stations.push_back({s.at("station_id").get<std::string>(),
                          s.at("probability").get<double>()});
  }
  return d;
}

}  // namespace

std::string format_hhmmss(double epoch_s) {
  long long total = static_cast<long long>(std::floor(epoch_s));
  long long day = ((total % 86400) + 86400) % 86400;
  const long long h = day / 3600;
  const long long m = (day % 3600) / 60;
  const long long s = day % 60;
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%02lld:%02lld:%02lld", h, m, s);
  return buf;
}

StationScan scan_station(const Trace& trace, const LogRegModel& model,
                         const ScanConfig& cfg) {
  if (model.weights.size() != model.feature_names.size() ||
      model.norm_params.size() != model.feature_names.size()) {
    throw ConfigError("model is inconsistent");
  }
  const auto windows = cut_windows(trace, cfg.window_s, cfg.step_s);

  StationScan scan;
  scan.station_id = trace.station_id;
  scan.scores.reserve(windows.size());
  for (const auto& w : windows) {
    WindowScore score;
    score.window_start = w.start_time;
    try {
      const Window pre = preprocess_window(w, cfg.bandpass);
      const FeatureVector fv =
          extract_features(pre, model.feature_names, cfg.surprise);
      score.probability = predict_raw(model, fv);
    } catch (const DataError&) {
      // dead or constant channel segment: never votes, never vetoes
      score.probability = 0.0;
      score.degenerate = true;
      ++scan.n_degenerate;
    }
    scan.scores.push_back(score);
  }
  return scan;
}

VoteResult vote(const std::vector<StationScan>& stations, const ScanConfig& cfg) {
  if (cfg.min_stations < 1) throw ConfigError("min_stations must be >= 1");
  VoteResult result;
  if (stations.empty()) return result;

  const size_t n_windows = stations.front().scores.size();
  for (const auto& st : stations) {
    if (st.scores.size() != n_windows) {
      throw DataError("misaligned window grids");
    }
    for (size_t k = 0; k < n_windows; ++k) {
      if (std::abs(st.scores[k].window_start -
                   stations.front().scores[k].window_start) > kGridTolerance) {
        throw DataError("misaligned window grids");
      }
    }
  }

  const int slack = std::max(0, cfg.slack_windows);
  for (size_t k = 0; k < n_windows; ++k) {
    Detection d;
    d.window_start = stations.front().scores[k].window_start;
    for (const auto& st : stations) {
      // with slack, a station's flag in a neighboring window counts here
      double best = -1.0;
      const size_t lo = k >= static_cast<size_t>(slack) ? k - slack : 0;
      const size_t hi = std::min(n_windows - 1, k + static_cast<size_t>(slack));
      for (size_t i = lo; i <= hi; ++i) {
        if (!st.scores[i].degenerate) {
          best = std::max(best, st.scores[i].probability);
        }
      }
      if (best >= cfg.threshold) {
        d.stations.push_back({st.station_id, best});
      }
    }
    d.n_stations = static_cast<int>(d.stations.size());
    if (d.n_stations >= cfg.min_stations) {
      result.detections.push_back(std::move(d));
    } else if (d.n_stations >= 1) {
      result.single_flags.push_back(std::move(d));
    }
  }
  return result;
}

ReportFormat report_format_from_string(const std::string& s) {
  if (s == "text") return ReportFormat::text;
  if (s == "csv") return ReportFormat::csv;
  if (s == "json") return ReportFormat::json;
  throw ConfigError("unknown report format '" + s + "'");
}

std::string format_report(const VoteResult& result, ReportFormat format,
                          bool log_single_flags) {
  std::string out;
  switch (format) {
    case ReportFormat::text: {
      out += "Event window start time | Number of sensors\n";
      for (const auto& d : result.detections) {
        out += format_hhmmss(d.window_start);
        out += " | ";
        out += std::to_string(d.n_stations);
        out += "\n";
      }
      if (log_single_flags && !result.single_flags.empty()) {
        out += "# below-quorum flags (not detections)\n";
        for (const auto& d : result.single_flags) {
          out += "# " + format_hhmmss(d.window_start) + " | " +
                 std::to_string(d.n_stations) + "\n";
        }
      }
      return out;
    }
    case ReportFormat::csv: {
      out += "window_start,window_start_hhmmss,n_stations\n";
      for (const auto& d : result.detections) {
        out += format_double(d.window_start) + "," + format_hhmmss(d.window_start) +
               "," + std::to_string(d.n_stations) + "\n";
      }
      return out;
    }
    case ReportFormat::json: {
      nlohmann::json j;
      j["detections"] = nlohmann::json::array();
      for (const auto& d : result.detections) {
        j["detections"].push_back(detection_to_json(d));
      }
      if (log_single_flags) {
        j["single_station_flags"] = nlohmann::json::array();
        for (const auto& d : result.single_flags) {
          j["single_station_flags"].push_back(detection_to_json(d));
        }
      }
      return j.dump(2) + "\n";
    }
  }
  throw ConfigError("unknown report format");
}

std::vector<Detection> detections_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("report json: ") + e.what());
  }
  std::vector<Detection> out;
  for (const auto& d : j.at("detections")) out.push_back(detection_from_json(d));
  return out;
}

}  // namespace quakescan
