#pragma once

#include <string>
#include <vector>

namespace quakescan {

enum class Label { event, noise, unlabeled };

const char* to_string(Label label);
Label label_from_string(const std::string& s);

// A continuous, uniformly sampled single-channel recording. Timestamps are
// real seconds since the Unix epoch.
struct Trace {
  std::string station_id;
  std::string channel;
  double start_time = 0.0;
  double sampling_rate = 0.0;
  std::vector<double> samples;

  double duration() const {
    return static_cast<double>(samples.size()) / sampling_rate;
  }

  // Enforces: positive rate, at least one sample, all samples finite.
  void validate() const;
};

// A fixed-duration segment cut from a trace, optionally labeled.
struct Window {
  std::string station_id;
  std::string channel;
  double start_time = 0.0;
  double sampling_rate = 0.0;
  std::vector<double> samples;
  Label label = Label::unlabeled;

  double duration() const {
    return static_cast<double>(samples.size()) / sampling_rate;
  }
};

struct CatalogEntry {
  double origin_time = 0.0;
  double magnitude = 0.0;
  std::string id;
};

// Entries are kept sorted ascending by origin time.
struct Catalog {
  std::vector<CatalogEntry> entries;

  void sort_by_time();
};

enum class TraceFormat { csv, binary };

// Picks binary for .bin/.qsif extensions, csv otherwise.
TraceFormat trace_format_for_path(const std::string& path);

Trace load_trace(const std::string& path, TraceFormat format);
void save_trace(const Trace& trace, const std::string& path, TraceFormat format);

Catalog load_catalog(const std::string& path);
void save_catalog(const Catalog& catalog, const std::string& path);

// Fixed-length windows starting at trace.start_time + k*step; a trailing
// remainder shorter than window_s is discarded.
std::vector<Window> cut_windows(const Trace& trace, double window_s, double step_s);

// One event window centered on each catalog origin time that fits inside the
// trace, plus non-overlapping noise windows whose spans stay at least
// guard_s away from every origin time. Event windows come first (catalog
// order), then noise windows in time order.
std::vector<Window> label_windows(const Trace& trace, const Catalog& catalog,
                                  double window_s, double guard_s);

}  // namespace quakescan
