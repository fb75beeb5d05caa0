#pragma once

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace iso {

struct dimension_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Probability vector over a labeled finite alphabet. Construction normalizes
// when the mass sum is within 1e-9 of 1 and rejects otherwise.
class Distribution {
 public:
  Distribution(std::vector<std::string> labels, std::vector<double> mass)
      : labels_(std::move(labels)), mass_(std::move(mass)) {
    validate();
  }
  // Unlabeled: symbols "0", "1", ...
  explicit Distribution(std::vector<double> mass) : mass_(std::move(mass)) {
    labels_.reserve(mass_.size());
    for (size_t i = 0; i < mass_.size(); ++i) labels_.push_back(std::to_string(i));
    validate();
  }

  static Distribution bernoulli(double p) { return Distribution({1.0 - p, p}); }
  static Distribution uniform(size_t m) {
    return Distribution(std::vector<double>(m, 1.0 / double(m)));
  }
  static Distribution point_mass(size_t i, size_t m) {
    std::vector<double> v(m, 0.0);
    v.at(i) = 1.0;
    return Distribution(std::move(v));
  }

  size_t size() const { return mass_.size(); }
  double operator[](size_t i) const { return mass_[i]; }
  const std::vector<double>& mass() const { return mass_; }
  const std::vector<std::string>& labels() const { return labels_; }

  bool same_alphabet(const Distribution& o) const { return labels_ == o.labels_; }

  // Expectation of a vector-valued function on the alphabet.
  double mean(const std::vector<double>& f) const {
    if (f.size() != mass_.size()) throw dimension_error("mean: size mismatch");
    double s = 0.0;
    for (size_t i = 0; i < f.size(); ++i) s += mass_[i] * f[i];
    return s;
  }

  std::vector<size_t> support() const {
    std::vector<size_t> s;
    for (size_t i = 0; i < mass_.size(); ++i)
      if (mass_[i] > 0.0) s.push_back(i);
    return s;
  }

 private:
  void validate() {
    if (mass_.empty()) throw std::invalid_argument("Distribution: empty");
    if (labels_.size() != mass_.size())
      throw dimension_error("Distribution: labels/mass size mismatch");
    std::unordered_set<std::string> seen(labels_.begin(), labels_.end());
    if (seen.size() != labels_.size())
      throw std::invalid_argument("Distribution: duplicate labels");
    double sum = 0.0;
    for (double m : mass_) {
      if (!(m >= 0.0) || !std::isfinite(m))
        throw std::invalid_argument("Distribution: negative or non-finite mass");
      sum += m;
    }
    if (std::fabs(sum - 1.0) > 1e-9)
      throw std::invalid_argument("Distribution: masses sum to " + std::to_string(sum));
    for (double& m : mass_) m /= sum;
  }

  std::vector<std::string> labels_;
  std::vector<double> mass_;
};

// One Distribution per conditioning symbol; all rows share the output alphabet.
class Kernel {
 public:
  explicit Kernel(std::vector<Distribution> rows) : rows_(std::move(rows)) {
    if (rows_.empty()) throw std::invalid_argument("Kernel: no rows");
    for (const auto& r : rows_)
      if (!r.same_alphabet(rows_.front()))
        throw dimension_error("Kernel: rows disagree on output alphabet");
  }

  size_t num_rows() const { return rows_.size(); }
  const Distribution& row(size_t w) const { return rows_.at(w); }
  size_t output_size() const { return rows_.front().size(); }

 private:
  std::vector<Distribution> rows_;
};

// (Q_W, Q_{X|W}) pair; the weight indexes kernel rows.
struct WeightedKernel {
  Distribution weight;
  Kernel kernel;

  WeightedKernel(Distribution w, Kernel k) : weight(std::move(w)), kernel(std::move(k)) {
    if (weight.size() > kernel.num_rows())
      throw dimension_error("WeightedKernel: weight support exceeds kernel rows");
  }
};

}  // namespace iso
