#pragma once

#include <span>
#include <vector>

#include "shredkit/distribution.hpp"

namespace shredkit {

inline constexpr double kDefaultKldEpsilon = 1e-6;

// KL divergence in bits. Both distributions are extended to the union of
// their labels, `epsilon` is added to every count and each side is
// renormalized. Throws BothEmpty when neither side has mass.
double kld(const Distribution& p, const Distribution& q, double epsilon = kDefaultKldEpsilon);

struct KWResult {
  double statistic = 0.0;  // H, tie corrected
  int df = 0;
  double p = 1.0;
  double tie_correction = 1.0;
};

// Kruskal-Wallis rank-sum test with midranks and the standard tie divisor.
KWResult kruskal_wallis(const std::vector<std::vector<double>>& groups);

// Midranks (1-based) of the pooled values.
std::vector<double> midranks(std::span<const double> values);

// Upper-tail chi-square probability, Q(df/2, x/2).
double chi_square_sf(double x, int df);

// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x);

struct Descriptive {
  double mean = 0.0;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
  double std = 0.0;  // population
};

Descriptive descriptive(std::span<const double> values);

}  // namespace shredkit
