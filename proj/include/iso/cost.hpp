#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "iso/distribution.hpp"

namespace iso {

// Nonnegative finite cost table c(x,y).
class CostMatrix {
 public:
  explicit CostMatrix(std::vector<std::vector<double>> entries)
      : entries_(std::move(entries)) {
    if (entries_.empty() || entries_.front().empty())
      throw std::invalid_argument("CostMatrix: empty");
    cols_ = entries_.front().size();
    for (const auto& row : entries_) {
      if (row.size() != cols_) throw dimension_error("CostMatrix: ragged rows");
      for (double v : row)
        if (!(v >= 0.0) || !std::isfinite(v))
          throw std::invalid_argument("CostMatrix: negative or non-finite entry");
    }
  }

  static CostMatrix hamming(size_t m) {
    std::vector<std::vector<double>> e(m, std::vector<double>(m, 1.0));
    for (size_t i = 0; i < m; ++i) e[i][i] = 0.0;
    return CostMatrix(std::move(e));
  }

  size_t rows() const { return entries_.size(); }
  size_t cols() const { return cols_; }
  double operator()(size_t i, size_t j) const { return entries_[i][j]; }
  const std::vector<std::vector<double>>& entries() const { return entries_; }

  double max_entry() const {
    double m = 0.0;
    for (const auto& row : entries_)
      for (double v : row) m = std::max(m, v);
    return m;
  }

  bool is_hamming() const {
    if (rows() != cols()) return false;
    for (size_t i = 0; i < rows(); ++i)
      for (size_t j = 0; j < cols(); ++j)
        if (entries_[i][j] != (i == j ? 0.0 : 1.0)) return false;
    return true;
  }

  // Square, zero diagonal, symmetric, triangle inequality within 1e-12.
  bool is_metric() const {
    if (rows() != cols()) return false;
    size_t m = rows();
    for (size_t i = 0; i < m; ++i) {
      if (std::fabs(entries_[i][i]) > 1e-12) return false;
      for (size_t j = 0; j < m; ++j) {
        if (std::fabs(entries_[i][j] - entries_[j][i]) > 1e-12) return false;
        for (size_t k = 0; k < m; ++k)
          if (entries_[i][j] > entries_[i][k] + entries_[k][j] + 1e-12) return false;
      }
    }
    return true;
  }

 private:
  std::vector<std::vector<double>> entries_;
  size_t cols_;
};

// Additive extension c_n(x^n, y^n) = sum_i c(x_i, y_i).
double additive_cost(const CostMatrix& c, const std::vector<size_t>& x_seq,
                     const std::vector<size_t>& y_seq);

}  // namespace iso
