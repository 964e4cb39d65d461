#include "fastsum/multi_index.hpp"

#include <stdexcept>
#include <string>

namespace fastsum {

std::vector<MultiIndex> enumerate_multi_indices(int p, int d) {
  if (p < 1 || d < 1) {
    throw std::invalid_argument("enumerate_multi_indices: p and d must be >= 1");
  }
  std::size_t total = 1;
  for (int j = 0; j < d; ++j) total *= static_cast<std::size_t>(p);

  std::vector<MultiIndex> out;
  out.reserve(total);
  MultiIndex alpha(static_cast<std::size_t>(d), 0);
  for (std::size_t i = 0; i < total; ++i) {
    out.push_back(alpha);
    // odometer increment, last component fastest
    for (int j = d - 1; j >= 0; --j) {
      if (++alpha[static_cast<std::size_t>(j)] < p) break;
      alpha[static_cast<std::size_t>(j)] = 0;
    }
  }
  return out;
}

std::uint64_t multi_index_factorial(const MultiIndex& alpha) {
  std::uint64_t prod = 1;
  for (int a : alpha) {
    if (a < 0) throw std::invalid_argument("multi_index_factorial: negative component");
    if (a > 20) throw std::range_error("multi_index_factorial: component > 20 overflows 64 bits");
    for (int i = 2; i <= a; ++i) prod *= static_cast<std::uint64_t>(i);
  }
  return prod;
}

int multi_index_degree(const MultiIndex& alpha) {
  int sum = 0;
  for (int a : alpha) sum += a;
  return sum;
}

double multi_index_power(std::span<const double> t, const MultiIndex& alpha) {
  if (t.size() != alpha.size()) {
    throw std::invalid_argument("multi_index_power: t and alpha lengths differ");
  }
  double prod = 1.0;
  for (std::size_t j = 0; j < alpha.size(); ++j) {
    for (int i = 0; i < alpha[j]; ++i) prod *= t[j];
  }
  return prod;
}

std::uint64_t binomial(int n, int k) {
  if (n < 0 || k < 0 || k > n) {
    throw std::invalid_argument("binomial: require 0 <= k <= n, got n=" + std::to_string(n) +
                                " k=" + std::to_string(k));
  }
  if (n > 62) throw std::range_error("binomial: n > 62 overflows 64 bits");
  if (k > n - k) k = n - k;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    // r * (n-k+i) is divisible by i at every step
    r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  }
  return r;
}

}  // namespace fastsum
