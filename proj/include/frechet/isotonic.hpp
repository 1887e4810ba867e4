#pragma once

#include <Eigen/Dense>
#include <vector>

namespace frechet {

/// Euclidean projection onto the non-decreasing cone: pool-adjacent-violators.
inline Eigen::VectorXd isotonic_projection(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  std::vector<double> value;  // block means
  std::vector<Eigen::Index> size;
  value.reserve(static_cast<std::size_t>(n));
  size.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    value.push_back(x[i]);
    size.push_back(1);
    while (value.size() > 1 && value[value.size() - 2] > value.back()) {
      const double merged = (value[value.size() - 2] * static_cast<double>(size[size.size() - 2]) +
                             value.back() * static_cast<double>(size.back())) /
                            static_cast<double>(size[size.size() - 2] + size.back());
      size[size.size() - 2] += size.back();
      value[value.size() - 2] = merged;
      value.pop_back();
      size.pop_back();
    }
  }
  Eigen::VectorXd out(n);
  Eigen::Index pos = 0;
  for (std::size_t b = 0; b < value.size(); ++b)
    for (Eigen::Index k = 0; k < size[b]; ++k) out[pos++] = value[b];
  return out;
}

}  // namespace frechet
