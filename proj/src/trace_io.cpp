#include "quakescan/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "quakescan/errors.hpp"

namespace quakescan {

namespace {

constexpr char kMagic[4] = {'Q', 'S', 'I', 'F'};
constexpr uint8_t kBinaryVersion = 1;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, const char* what) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) {
    throw DataError(std::string("failed to parse ") + what + " '" + s + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& s, char delim) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream iss(s);
  while (std::getline(iss, cur, delim)) out.push_back(cur);
  return out;
}

void write_u64_le(std::ostream& os, uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 8);
}

uint64_t read_u64_le(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
  return v;
}

void write_f64_le(std::ostream& os, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  write_u64_le(os, bits);
}

double read_f64_le(std::istream& is) {
  const uint64_t bits = read_u64_le(is);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

void write_string(std::ostream& os, const std::string& s) {
  char b[4];
  const uint32_t n = static_cast<uint32_t>(s.size());
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((n >> (8 * i)) & 0xff);
  os.write(b, 4);
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  uint32_t n = 0;
  for (int i = 0; i < 4; ++i) n |= static_cast<uint32_t>(b[i]) << (8 * i);
  std::string s(n, '\0');
  is.read(s.data(), n);
  return s;
}

Trace load_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open trace file: " + path);

  std::string header;
  if (!std::getline(in, header)) throw DataError("malformed header: empty file " + path);
  if (!header.empty() && header.back() == '\r') header.pop_back();

  Trace t;
  bool have_rate = false, have_start = false;
  for (const auto& field : split(header, ',')) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) {
      throw DataError("malformed header field '" + field + "' in " + path);
    }
    const std::string key = field.substr(0, eq);
    const std::string value = field.substr(eq + 1);
    if (key == "station") {
      t.station_id = value;
    } else if (key == "channel") {
      t.channel = value;
    } else if (key == "start") {
      t.start_time = parse_double(value, "start");
      have_start = true;
    } else if (key == "rate") {
      t.sampling_rate = parse_double(value, "rate");
      have_rate = true;
    } else {
      throw DataError("malformed header: unknown key '" + key + "' in " + path);
    }
  }
  if (!have_rate || !have_start) {
    throw DataError("malformed header: missing start/rate in " + path);
  }

  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    t.samples.push_back(parse_double(line, "sample"));
  }
  t.validate();
  return t;
}

void save_trace_csv(const Trace& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write trace file: " + path);
  out << "station=" << t.station_id << ",channel=" << t.channel
      << ",start=" << format_double(t.start_time)
      << ",rate=" << format_double(t.sampling_rate) << "\n";
  for (double v : t.samples) out << format_double(v) << "\n";
  if (!out) throw DataError("write failed: " + path);
}

Trace load_trace_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open trace file: " + path);

  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw DataError("malformed header: bad magic in " + path);
  }
  char version = 0;
  in.read(&version, 1);
  if (!in || static_cast<uint8_t>(version) != kBinaryVersion) {
    throw DataError("malformed header: unsupported version in " + path);
  }

  Trace t;
  t.sampling_rate = read_f64_le(in);
  t.start_time = read_f64_le(in);
  t.station_id = read_string(in);
  t.channel = read_string(in);
  const uint64_t n = read_u64_le(in);
  if (!in) throw DataError("malformed header: truncated file " + path);
  t.samples.resize(n);
  for (uint64_t i = 0; i < n; ++i) t.samples[i] = read_f64_le(in);
  if (!in) throw DataError("truncated sample data in " + path);
  t.validate();
  return t;
}

void save_trace_binary(const Trace& t, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write trace file: " + path);
  out.write(kMagic, 4);
  const char version = static_cast<char>(kBinaryVersion);
  out.write(&version, 1);
  write_f64_le(out, t.sampling_rate);
  write_f64_le(out, t.start_time);
  write_string(out, t.station_id);
  write_string(out, t.channel);
  write_u64_le(out, t.samples.size());
  for (double v : t.samples) write_f64_le(out, v);
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace

const char* to_string(Label label) {
  switch (label) {
    case Label::event: return "event";
    case Label::noise: return "noise";
    default: return "unlabeled";
  }
}

Label label_from_string(const std::string& s) {
  if (s == "event") return Label::event;
  if (s == "noise") return Label::noise;
  if (s == "unlabeled") return Label::unlabeled;
  throw DataError("unknown label '" + s + "'");
}

void Trace::validate() const {
  if (!(sampling_rate > 0.0)) throw DataError("non-positive sampling rate");
  if (samples.empty()) throw DataError("trace has no samples");
  for (double v : samples) {
    if (!std::isfinite(v)) throw DataError("non-finite sample");
  }
}

void Catalog::sort_by_time() {
  std::stable_sort(entries.begin(), entries.end(),
                   [](const CatalogEntry& a, const CatalogEntry& b) {
                     return a.origin_time < b.origin_time;
                   });
}

TraceFormat trace_format_for_path(const std::string& path) {
  const auto dot = path.rfind('.');
  if (dot != std::string::npos) {
    const std::string ext = path.substr(dot + 1);
    if (ext == "bin" || ext == "qsif") return TraceFormat::binary;
  }
  return TraceFormat::csv;
}

Trace load_trace(const std::string& path, TraceFormat format) {
  return format == TraceFormat::csv ? load_trace_csv(path) : load_trace_binary(path);
}

void save_trace(const Trace& trace, const std::string& path, TraceFormat format) {
  trace.validate();
  if (format == TraceFormat::csv) {
    save_trace_csv(trace, path);
  } else {
    save_trace_binary(trace, path);
  }
}

Catalog load_catalog(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open catalog file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty catalog file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "origin_time,magnitude,id") {
    throw DataError("malformed catalog header in " + path);
  }
  Catalog cat;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 3) throw DataError("malformed catalog row '" + line + "'");
    CatalogEntry e;
    e.origin_time = parse_double(fields[0], "origin_time");
    e.magnitude = parse_double(fields[1], "magnitude");
    e.id = fields[2];
    cat.entries.push_back(std::move(e));
  }
  cat.sort_by_time();
  return cat;
}

void save_catalog(const Catalog& catalog, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write catalog file: " + path);
  out << "origin_time,magnitude,id\n";
  for (const auto& e : catalog.entries) {
    out << format_double(e.origin_time) << "," << format_double(e.magnitude)
        << "," << e.id << "\n";
  }
  if (!out) throw DataError("write failed: " + path);
}

std::vector<Window> cut_windows(const Trace& trace, double window_s, double step_s) {
  if (!(window_s > 0.0) || !(step_s > 0.0)) {
    throw ConfigError("window and step must be positive");
  }
  const size_t n = trace.samples.size();
  const size_t window_len =
      static_cast<size_t>(std::llround(window_s * trace.sampling_rate));
  const size_t step_len =
      static_cast<size_t>(std::llround(step_s * trace.sampling_rate));
  if (window_len == 0 || step_len == 0) {
    throw ConfigError("window and step must span at least one sample");
  }
  if (window_len > n) throw DataError("window longer than trace");

  const size_t count = (n - window_len) / step_len + 1;
  std::vector<Window> out;
  out.reserve(count);
  for (size_t k = 0; k < count; ++k) {
    Window w;
    w.station_id = trace.station_id;
    w.channel = trace.channel;
    w.sampling_rate = trace.sampling_rate;
    const size_t begin = k * step_len;
    w.start_time = trace.start_time +
                   static_cast<double>(begin) / trace.sampling_rate;
    w.samples.assign(trace.samples.begin() + static_cast<ptrdiff_t>(begin),
                     trace.samples.begin() + static_cast<ptrdiff_t>(begin + window_len));
    out.push_back(std::move(w));
  }
  return out;
}

std::vector<Window> label_windows(const Trace& trace, const Catalog& catalog,
                                  double window_s, double guard_s) {
  if (!(window_s > 0.0)) throw ConfigError("window must be positive");
  if (guard_s < window_s) throw ConfigError("guard must be at least one window");

  const size_t n = trace.samples.size();
  const size_t window_len =
      static_cast<size_t>(std::llround(window_s * trace.sampling_rate));
  if (window_len == 0 || window_len > n) throw DataError("window longer than trace");

  std::vector<Window> out;

  // Event windows centered on each origin time; entries whose centered
  // window does not fit inside the trace are skipped.
  for (const auto& e : catalog.entries) {
    const double want_start = e.origin_time - window_s / 2.0;
    const long long begin =
        std::llround((want_start - trace.start_time) * trace.sampling_rate);
    if (begin < 0 || static_cast<size_t>(begin) + window_len > n) continue;
    Window w;
    w.station_id = trace.station_id;
    w.channel = trace.channel;
    w.sampling_rate = trace.sampling_rate;
    w.start_time = trace.start_time +
                   static_cast<double>(begin) / trace.sampling_rate;
    w.samples.assign(
        trace.samples.begin() + static_cast<ptrdiff_t>(begin),
        trace.samples.begin() + static_cast<ptrdiff_t>(begin + window_len));
    w.label = Label::event;
    out.push_back(std::move(w));
  }

  // Non-overlapping noise windows clear of every guard zone.
  const size_t count = n / window_len;
  for (size_t k = 0; k < count; ++k) {
    const size_t begin = k * window_len;
    const double t0 = trace.start_time + static_cast<double>(begin) / trace.sampling_rate;
    const double t1 = t0 + window_s;
    bool clear = true;
    for (const auto& e : catalog.entries) {
      if (t0 < e.origin_time + guard_s && t1 > e.origin_time - guard_s) {
        clear = false;
        break;
      }
    }
    if (!clear) continue;
    Window w;
    w.station_id = trace.station_id;
    w.channel = trace.channel;
    w.sampling_rate = trace.sampling_rate;
    w.start_time = t0;
    w.samples.assign(
        trace.samples.begin() + static_cast<ptrdiff_t>(begin),
        trace.samples.begin() + static_cast<ptrdiff_t>(begin + window_len));
    w.label = Label::noise;
    out.push_back(std::move(w));
  }

  return out;
}

}  // namespace quakescan
