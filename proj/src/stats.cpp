#include "shredkit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "shredkit/error.hpp"

namespace shredkit {

double kld(const Distribution& p, const Distribution& q, double epsilon) {
  if (epsilon < 0.0) throw std::invalid_argument("kld: epsilon must be non-negative");
  const double tp = p.total();
  const double tq = q.total();
  if (!(tp > 0.0) && !(tq > 0.0)) throw Error(ErrorCode::BothEmpty, "kld: both distributions empty");

  Distribution support;
  for (const auto& b : p.bins()) support.add(b.label, 0.0);
  for (const auto& b : q.bins()) support.add(b.label, 0.0);
  const double n = static_cast<double>(support.size());
  const double zp = tp + epsilon * n;
  const double zq = tq + epsilon * n;

  double d = 0.0;
  for (const auto& b : support.bins()) {
    const double pi = (p.count(b.label) + epsilon) / zp;
    const double qi = (q.count(b.label) + epsilon) / zq;
    if (pi <= 0.0) continue;
    if (qi <= 0.0) return std::numeric_limits<double>::infinity();
    d += pi * std::log2(pi / qi);
  }
  return d > 0.0 ? d : 0.0;
}

std::vector<double> midranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

KWResult kruskal_wallis(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw Error(ErrorCode::DegenerateInput, "need at least 2 groups");
  std::vector<double> pooled;
  for (const auto& g : groups) {
    if (g.empty()) throw Error(ErrorCode::DegenerateInput, "empty group");
    pooled.insert(pooled.end(), g.begin(), g.end());
  }
  const auto n_total = static_cast<double>(pooled.size());
  if (pooled.size() < 3) throw Error(ErrorCode::DegenerateInput, "need at least 3 observations");

  const auto ranks = midranks(pooled);

  // Tie correction from the sorted pooled values.
  std::vector<double> sorted = pooled;
  std::sort(sorted.begin(), sorted.end());
  double tie_sum = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const auto t = static_cast<double>(j - i);
    tie_sum += t * t * t - t;
    i = j;
  }
  const double correction = 1.0 - tie_sum / (n_total * n_total * n_total - n_total);
  if (correction <= 0.0) throw Error(ErrorCode::DegenerateInput, "all values identical");

  double sum = 0.0;
  std::size_t offset = 0;
  for (const auto& g : groups) {
    double rank_sum = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) rank_sum += ranks[offset + k];
    offset += g.size();
    sum += rank_sum * rank_sum / static_cast<double>(g.size());
  }
  double h = 12.0 / (n_total * (n_total + 1.0)) * sum - 3.0 * (n_total + 1.0);
  h /= correction;
  if (h < 0.0) h = 0.0;

  KWResult r;
  r.statistic = h;
  r.df = static_cast<int>(groups.size()) - 1;
  r.p = chi_square_sf(h, r.df);
  r.tie_correction = correction;
  return r;
}

double gamma_q(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw std::invalid_argument("gamma_q: need a > 0, x >= 0");
  if (x == 0.0) return 1.0;
  constexpr double eps = 1e-16;
  constexpr int max_iter = 10000;
  const double log_prefix = -x + a * std::log(x) - std::lgamma(a);

  if (x < a + 1.0) {
    // Series for the lower function P.
    double ap = a;
    double del = 1.0 / a;
    double sum = del;
    for (int n = 0; n < max_iter; ++n) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * eps) break;
    }
    const double p = sum * std::exp(log_prefix);
    return std::clamp(1.0 - p, 0.0, 1.0);
  }

  // Continued fraction for Q (modified Lentz).
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= max_iter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) break;
  }
  return std::clamp(std::exp(log_prefix) * h, 0.0, 1.0);
}

double chi_square_sf(double x, int df) {
  if (df <= 0) throw std::invalid_argument("chi_square_sf: df must be positive");
  if (x <= 0.0) return 1.0;
  return gamma_q(0.5 * df, 0.5 * x);
}

Descriptive descriptive(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "descriptive: no values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = sorted.size();

  Descriptive d;
  d.min = sorted.front();
  d.max = sorted.back();
  d.median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  // Welford update.
  double mean = 0.0, m2 = 0.0;
  std::size_t k = 0;
  for (double v : values) {
    ++k;
    const double delta = v - mean;
    mean += delta / static_cast<double>(k);
    m2 += delta * (v - mean);
  }
  d.mean = mean;
  d.std = std::sqrt(m2 / static_cast<double>(n));
  return d;
}

}  // namespace shredkit
