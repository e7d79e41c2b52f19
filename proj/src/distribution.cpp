#include "shredkit/distribution.hpp"

#include <algorithm>
#include <string>

namespace shredkit {

Distribution::Distribution(const std::vector<std::string>& labels) {
  for (const auto& l : labels) add(l, 0.0);
}

void Distribution::add(const std::string& label, double count) {
  auto [it, inserted] = index_.try_emplace(label, bins_.size());
  if (inserted) {
    bins_.push_back({label, count});
  } else {
    bins_[it->second].count += count;
  }
}

void Distribution::merge(const Distribution& other) {
  for (const auto& b : other.bins_) add(b.label, b.count);
}

double Distribution::count(const std::string& label) const {
  auto it = index_.find(label);
  return it == index_.end() ? 0.0 : bins_[it->second].count;
}

double Distribution::total() const {
  double t = 0.0;
  for (const auto& b : bins_) t += b.count;
  return t;
}

std::vector<double> Distribution::probabilities() const {
  std::vector<double> p(bins_.size(), 0.0);
  const double t = total();
  if (t <= 0.0) return p;
  for (std::size_t i = 0; i < bins_.size(); ++i) p[i] = bins_[i].count / t;
  return p;
}

double Distribution::probability(const std::string& label) const {
  const double t = total();
  return t > 0.0 ? count(label) / t : 0.0;
}

void Distribution::sort_numeric() {
  std::stable_sort(bins_.begin(), bins_.end(), [](const Bin& a, const Bin& b) {
    return std::stod(a.label) < std::stod(b.label);
  });
  index_.clear();
  for (std::size_t i = 0; i < bins_.size(); ++i) index_[bins_[i].label] = i;
}

}  // namespace shredkit
