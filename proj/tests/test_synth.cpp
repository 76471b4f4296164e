#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "quakescan/errors.hpp"
#include "quakescan/fft.hpp"
#include "quakescan/preprocess.hpp"
#include "quakescan/stats.hpp"
#include "quakescan/synth.hpp"
#include "support.hpp"

using namespace quakescan;

TEST_CASE("make_noise_window") {
  SynthSpec spec;
  spec.rng_seed = 12;

  SUBCASE("white noise mean is near zero") {
    const auto w = make_noise_window(spec, 20.0);
    REQUIRE(w.samples.size() == 4000);
    // mean of n standard normals has sd 1/sqrt(n)
    CHECK(std::abs(stats::mean(w.samples)) < 3.0 / std::sqrt(4000.0));
    CHECK(w.label == Label::noise);
  }

  SUBCASE("same seed reproduces the window exactly") {
    const auto a = make_noise_window(spec, 20.0);
    const auto b = make_noise_window(spec, 20.0);
    CHECK(a.samples == b.samples);
    SynthSpec other = spec;
    other.rng_seed = 13;
    CHECK(make_noise_window(other, 20.0).samples != a.samples);
  }

  SUBCASE("colored noise has the requested log-log spectral slope") {
    SynthSpec colored = spec;
    colored.noise_model = NoiseModel::colored;
    colored.colored_exponent = 1.0;

    // average periodograms over segments, then fit log P against log f
    const auto w = make_noise_window(colored, 160.0);  // 32768 samples
    const size_t seg_len = 4096;
    const size_t n_segs = w.samples.size() / seg_len;
    std::vector<double> avg;
    std::vector<double> freqs;
    for (size_t s = 0; s < n_segs; ++s) {
      const auto spec_s = periodogram(
          std::span<const double>(w.samples.data() + s * seg_len, seg_len));
      if (avg.empty()) {
        avg.assign(spec_s.power.size(), 0.0);
        freqs = spec_s.freq;
      }
      for (size_t i = 0; i < avg.size(); ++i) avg[i] += spec_s.power[i];
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    size_t count = 0;
    for (size_t i = 0; i < freqs.size(); ++i) {
      if (freqs[i] < 0.005 || freqs[i] > 0.4) continue;  // skip DC edge, Nyquist
      const double lx = std::log10(freqs[i]);
      const double ly = std::log10(avg[i] / static_cast<double>(n_segs));
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
      ++count;
    }
    const double n = static_cast<double>(count);
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(std::abs(slope - (-1.0)) < 0.3);
  }
}

TEST_CASE("make_event_window") {
  SynthSpec spec;
  spec.rng_seed = 21;
  spec.snr = 10.0;

  SUBCASE("wavelet peak is snr times the noise rms, by construction") {
    const auto noise = make_noise_window(spec, 20.0);
    const auto event = make_event_window(spec, 20.0, 10.0);
    std::vector<double> wavelet_part(event.samples.size());
    for (size_t i = 0; i < wavelet_part.size(); ++i) {
      wavelet_part[i] = event.samples[i] - noise.samples[i];
    }
    const double peak = stats::max_abs(wavelet_part);
    CHECK(peak == doctest::Approx(10.0 * stats::rms(noise.samples)).epsilon(1e-9));
    CHECK(event.label == Label::event);
  }

  SUBCASE("energy concentrates near the onset for strong events") {
    for (uint64_t seed = 100; seed < 110; ++seed) {
      SynthSpec s = spec;
      s.rng_seed = seed;
      s.snr = 5.0;
      const auto w = make_event_window(s, 20.0, 10.0);
      size_t peak = 0;
      for (size_t i = 1; i < w.samples.size(); ++i) {
        if (std::abs(w.samples[i]) > std::abs(w.samples[peak])) peak = i;
      }
      const double peak_time = static_cast<double>(peak) / s.rate;
      CHECK(std::abs(peak_time - 10.0) <= 2.0);
    }
  }

  SUBCASE("vanishing snr reduces to the plain noise window") {
    SynthSpec s = spec;
    s.snr = 1e-6;
    const auto noise = make_noise_window(s, 20.0);
    const auto event = make_event_window(s, 20.0, 5.0);
    double max_diff = 0.0;
    for (size_t i = 0; i < noise.samples.size(); ++i) {
      max_diff = std::max(max_diff, std::abs(event.samples[i] - noise.samples[i]));
    }
    CHECK(max_diff < 1e-5);
  }

  SUBCASE("onset outside the window is rejected") {
    CHECK_THROWS_AS(make_event_window(spec, 20.0, 25.0), ConfigError);
    CHECK_THROWS_AS(make_event_window(spec, 20.0, -1.0), ConfigError);
  }
}

TEST_CASE("make_continuous") {
  SynthSpec spec;
  spec.rng_seed = 33;
  spec.wavelet = WaveletKind::damped_sine;
  spec.snr = 9.0;

  SUBCASE("truth catalog and per-station event energy") {
    const std::vector<double> times{50.0, 130.0};
    const auto rec = make_continuous(spec, 200.0, times, 5, {});
    REQUIRE(rec.traces.size() == 5);
    REQUIRE(rec.truth.entries.size() == 2);
    CHECK(rec.truth.entries[0].origin_time == 50.0);
    CHECK(rec.truth.entries[1].origin_time == 130.0);

    for (const auto& t : rec.traces) {
      REQUIRE(t.samples.size() == 40000);
      const double background = stats::rms(
          std::span<const double>(t.samples.data(), 5000));
      for (double te : times) {
        const size_t at = static_cast<size_t>(te * spec.rate);
        const double local = stats::rms(
            std::span<const double>(t.samples.data() + at, 400));
        CHECK(local > 2.0 * background);
      }
    }
  }

  SUBCASE("independent noise per station") {
    const auto rec = make_continuous(spec, 100.0, {}, 2, {});
    CHECK(rec.traces[0].samples != rec.traces[1].samples);
    CHECK(rec.traces[0].station_id != rec.traces[1].station_id);
  }

  SUBCASE("zero moveout aligns events across stations") {
    const auto rec = make_continuous(spec, 100.0, {40.0}, 3, {0.0, 0.0, 0.0});
    std::vector<size_t> peaks;
    for (const auto& t : rec.traces) {
      size_t peak = 0;
      for (size_t i = 1; i < t.samples.size(); ++i) {
        if (std::abs(t.samples[i]) > std::abs(t.samples[peak])) peak = i;
      }
      peaks.push_back(peak);
    }
    for (size_t p : peaks) {
      CHECK(std::abs(static_cast<double>(p) - 40.0 * spec.rate) < 0.6 * spec.rate);
    }
  }

  SUBCASE("moveout shifts the arrival") {
    SynthSpec strong = spec;
    strong.snr = 50.0;
    const auto rec = make_continuous(strong, 100.0, {40.0}, 2, {0.0, 3.0});
    std::vector<size_t> peaks;
    for (const auto& t : rec.traces) {
      size_t peak = 0;
      for (size_t i = 1; i < t.samples.size(); ++i) {
        if (std::abs(t.samples[i]) > std::abs(t.samples[peak])) peak = i;
      }
      peaks.push_back(peak);
    }
    const double shift =
        (static_cast<double>(peaks[1]) - static_cast<double>(peaks[0])) / spec.rate;
    CHECK(shift == doctest::Approx(3.0).epsilon(0.1));
  }

  SUBCASE("byte-identical reruns") {
    const auto a = make_continuous(spec, 60.0, {30.0}, 2, {});
    const auto b = make_continuous(spec, 60.0, {30.0}, 2, {});
    for (size_t s = 0; s < 2; ++s) CHECK(a.traces[s].samples == b.traces[s].samples);
  }

  SUBCASE("event outside the record is rejected") {
    CHECK_THROWS_AS(make_continuous(spec, 100.0, {150.0}, 2, {}), ConfigError);
    CHECK_THROWS_AS(make_continuous(spec, 100.0, {50.0}, 2, {1.0}), ConfigError);
  }
}

TEST_CASE("event windows survive preprocessing down to faint snr") {
  for (double snr : {0.1, 0.5, 2.0}) {
    SynthSpec spec;
    spec.rng_seed = 81;
    spec.snr = snr;
    const auto w = make_event_window(spec, 20.0, 10.0);
    CHECK_NOTHROW(preprocess_window(w, BandpassSpec{}));
  }
}
