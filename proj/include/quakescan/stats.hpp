#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace quakescan::stats {

double mean(std::span<const double> x);

// Sample standard deviation (n-1 denominator); 0 for n < 2.
double sample_std(std::span<const double> x);

double rms(std::span<const double> x);
double max_abs(std::span<const double> x);

// Linear-interpolation quantile on a sorted sequence, q in [0, 1]
// (the numpy default convention).
double quantile_sorted(std::span<const double> sorted, double q);

// Convenience overloads that copy and sort.
double quantile(std::vector<double> values, double q);
double median(std::vector<double> values);
double iqr(std::vector<double> values);

// Pearson correlation; 0 when either input has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

}  // namespace quakescan::stats
