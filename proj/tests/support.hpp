#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "quakescan/rng.hpp"

namespace qstest {

// Scratch directory removed on destruction.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("quakescan_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& rel) const { return (path / rel).string(); }
};

inline std::vector<double> sine_wave(size_t n, double period_samples,
                                     double amplitude = 1.0, double phase = 0.0) {
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i) {
    out[i] = amplitude * std::sin(2.0 * std::numbers::pi *
                                      static_cast<double>(i) / period_samples +
                                  phase);
  }
  return out;
}

inline std::vector<double> gaussian_noise(size_t n, uint64_t seed) {
  quakescan::Rng rng(seed);
  std::vector<double> out(n);
  for (double& v : out) v = rng.next_gaussian();
  return out;
}

inline bool approx_rel(double a, double b, double rel) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) <= rel * scale;
}

}  // namespace qstest
