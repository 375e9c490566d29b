#pragma once

#include <cstddef>
#include <span>

namespace semplan::stats {

double normal_pdf(double z);
double normal_cdf(double z);

double mean(std::span<const double> xs);

/// Standard error of the mean (sample standard deviation / sqrt(n)). Zero for n < 2.
double standard_error(std::span<const double> xs);

/// Spearman rank correlation with average ranks for ties. Returns NaN when
/// either sequence is constant (correlation undefined).
double spearman(std::span<const double> xs, std::span<const double> ys);

struct Interval {
  double lo;
  double hi;
};

/// Wilson score interval for a binomial proportion at confidence z (default 95%).
Interval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054);

struct PairedTest {
  std::size_t n = 0;
  double mean_difference = 0.0;  // mean(a - b)
  double t_statistic = 0.0;
  double p_value = 1.0;          // one-sided, H1: mean(a - b) < 0
};

/// One-sided paired t-test that `a` is smaller than `b` on average.
PairedTest paired_t_test_less(std::span<const double> a, std::span<const double> b);

}  // namespace semplan::stats
