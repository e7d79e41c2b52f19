#pragma once

#include <map>
#include <string>
#include <vector>

namespace shredkit {

// Categorical distribution over labelled bins. Bin order is insertion order;
// labels are unique. Probabilities are derived on demand as count / total.
class Distribution {
 public:
  struct Bin {
    std::string label;
    double count = 0.0;
  };

  Distribution() = default;
  explicit Distribution(const std::vector<std::string>& labels);

  // Adds to an existing bin or appends a new one.
  void add(const std::string& label, double count = 1.0);
  void merge(const Distribution& other);

  double count(const std::string& label) const;
  bool contains(const std::string& label) const { return index_.contains(label); }
  double total() const;
  std::vector<double> probabilities() const;
  double probability(const std::string& label) const;

  const std::vector<Bin>& bins() const { return bins_; }
  std::size_t size() const { return bins_.size(); }
  bool empty() const { return bins_.empty(); }

  // Re-orders bins by the numeric value of their labels (tick-valued bins).
  void sort_numeric();

  bool operator==(const Distribution& o) const { return bins_ == o.bins_; }

 private:
  std::vector<Bin> bins_;
  std::map<std::string, std::size_t> index_;
};

inline bool operator==(const Distribution::Bin& a, const Distribution::Bin& b) {
  return a.label == b.label && a.count == b.count;
}

}  // namespace shredkit
