#include "quakescan.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "json.hpp"
#include "quakescan/detector.hpp"
#include "quakescan/errors.hpp"
#include "quakescan/features.hpp"
#include "quakescan/model.hpp"
#include "quakescan/pipeline.hpp"
#include "quakescan/preprocess.hpp"
#include "quakescan/trace.hpp"

struct qs_trace {
  quakescan::Trace trace;
};

struct qs_model {
  quakescan::LogRegModel model;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

// Runs fn, translating the exception taxonomy into status codes.
template <typename Fn>
qs_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return QS_OK;
  } catch (const quakescan::ConfigError& e) {
    set_error(e.what());
    return QS_ERR_CONFIG;
  } catch (const quakescan::ConvergenceError& e) {
    set_error(e.what());
    return QS_ERR_CONVERGENCE;
  } catch (const quakescan::DataError& e) {
    set_error(e.what());
    return QS_ERR_DATA;
  } catch (const std::exception& e) {
    set_error(e.what());
    return QS_ERR_DATA;
  }
}

quakescan::TraceFormat parse_format(const char* format, const char* path) {
  if (format == nullptr) return quakescan::trace_format_for_path(path ? path : "");
  const std::string f = format;
  if (f == "csv") return quakescan::TraceFormat::csv;
  if (f == "binary") return quakescan::TraceFormat::binary;
  throw quakescan::ConfigError("unknown trace format '" + f + "'");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out != nullptr) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

qs_status run_pipeline(const char* command, const char* config_json,
                       char** summary_json) {
  return guarded([&] {
    if (config_json == nullptr) {
      throw quakescan::ConfigError("config must not be null");
    }
    nlohmann::json config;
    try {
      config = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::exception& e) {
      throw quakescan::ConfigError(std::string("bad config json: ") + e.what());
    }
    const nlohmann::json summary = quakescan::pipeline::run_command(command, config);
    if (summary_json != nullptr) *summary_json = dup_string(summary.dump(2));
  });
}

}  // namespace

extern "C" {

const char* qs_version(void) { return "0.1.0"; }

const char* qs_last_error(void) { return g_last_error.c_str(); }

qs_status qs_trace_load(const char* path, const char* format, qs_trace** out) {
  return guarded([&] {
    if (path == nullptr || out == nullptr) {
      throw quakescan::ConfigError("null argument");
    }
    auto handle = std::make_unique<qs_trace>();
    handle->trace = quakescan::load_trace(path, parse_format(format, path));
    *out = handle.release();
  });
}

qs_status qs_trace_create(const char* station, const char* channel,
                          double start_epoch_s, double rate_hz,
                          const double* samples, uint64_t n, qs_trace** out) {
  return guarded([&] {
    if (out == nullptr || samples == nullptr) {
      throw quakescan::ConfigError("null argument");
    }
    auto handle = std::make_unique<qs_trace>();
    handle->trace.station_id = station ? station : "";
    handle->trace.channel = channel ? channel : "";
    handle->trace.start_time = start_epoch_s;
    handle->trace.sampling_rate = rate_hz;
    handle->trace.samples.assign(samples, samples + n);
    handle->trace.validate();
    *out = handle.release();
  });
}

qs_status qs_trace_save(const qs_trace* trace, const char* path,
                        const char* format) {
  return guarded([&] {
    if (trace == nullptr || path == nullptr) {
      throw quakescan::ConfigError("null argument");
    }
    quakescan::save_trace(trace->trace, path, parse_format(format, path));
  });
}

const char* qs_trace_station(const qs_trace* trace) {
  return trace ? trace->trace.station_id.c_str() : "";
}

const char* qs_trace_channel(const qs_trace* trace) {
  return trace ? trace->trace.channel.c_str() : "";
}

double qs_trace_start(const qs_trace* trace) {
  return trace ? trace->trace.start_time : 0.0;
}

double qs_trace_rate(const qs_trace* trace) {
  return trace ? trace->trace.sampling_rate : 0.0;
}

uint64_t qs_trace_size(const qs_trace* trace) {
  return trace ? trace->trace.samples.size() : 0;
}

const double* qs_trace_samples(const qs_trace* trace) {
  return trace ? trace->trace.samples.data() : nullptr;
}

void qs_trace_free(qs_trace* trace) { delete trace; }

qs_status qs_model_load(const char* path, qs_model** out) {
  return guarded([&] {
    if (path == nullptr || out == nullptr) {
      throw quakescan::ConfigError("null argument");
    }
    auto handle = std::make_unique<qs_model>();
    handle->model = quakescan::load_model(path);
    *out = handle.release();
  });
}

qs_status qs_model_save(const qs_model* model, const char* path) {
  return guarded([&] {
    if (model == nullptr || path == nullptr) {
      throw quakescan::ConfigError("null argument");
    }
    quakescan::save_model(model->model, path);
  });
}

uint64_t qs_model_feature_count(const qs_model* model) {
  return model ? model->model.feature_names.size() : 0;
}

const char* qs_model_feature_name(const qs_model* model, uint64_t index) {
  if (model == nullptr || index >= model->model.feature_names.size()) return "";
  return model->model.feature_names[index].c_str();
}

qs_status qs_model_predict_window(const qs_model* model, const double* samples,
                                  uint64_t n, double rate_hz, double* prob_out) {
  return guarded([&] {
    if (model == nullptr || samples == nullptr || prob_out == nullptr) {
      throw quakescan::ConfigError("null argument");
    }
    quakescan::Window w;
    w.station_id = "capi";
    w.channel = "Z";
    w.sampling_rate = rate_hz;
    w.samples.assign(samples, samples + n);
    const quakescan::Window pre =
        quakescan::preprocess_window(w, quakescan::BandpassSpec{});
    const quakescan::FeatureVector fv = quakescan::extract_features(
        pre, model->model.feature_names, quakescan::SurpriseSpec{});
    *prob_out = quakescan::predict_raw(model->model, fv);
  });
}

void qs_model_free(qs_model* model) { delete model; }

qs_status qs_run_synth(const char* config_json, char** summary_json) {
  return run_pipeline("synth", config_json, summary_json);
}

qs_status qs_run_extract(const char* config_json, char** summary_json) {
  return run_pipeline("extract", config_json, summary_json);
}

qs_status qs_run_rank(const char* config_json, char** summary_json) {
  return run_pipeline("rank", config_json, summary_json);
}

qs_status qs_run_train(const char* config_json, char** summary_json) {
  return run_pipeline("train", config_json, summary_json);
}

qs_status qs_run_scan(const char* config_json, char** summary_json) {
  return run_pipeline("scan", config_json, summary_json);
}

qs_status qs_run_eval(const char* config_json, char** summary_json) {
  return run_pipeline("eval", config_json, summary_json);
}

void qs_string_free(char* s) { std::free(s); }

}  // extern "C"
