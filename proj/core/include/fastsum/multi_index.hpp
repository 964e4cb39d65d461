#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace fastsum {

//! d-dimensional tuple of non-negative integers.
//! Conventions: |alpha| = sum of components, alpha! = product of component
//! factorials, t^alpha = product of per-component powers (0^0 = 1).
using MultiIndex = std::vector<int>;

//! All alpha with every component in [0, p), lexicographic with the LAST
//! dimension varying fastest. Length is exactly p^d. The flat position of
//! alpha in this order is sum_j alpha[j] * p^(d-1-j); coefficient tensors
//! throughout the library use that layout.
std::vector<MultiIndex> enumerate_multi_indices(int p, int d);

//! alpha! as an exact 64-bit integer. Components are guarded at <= 20.
std::uint64_t multi_index_factorial(const MultiIndex& alpha);

//! |alpha|.
int multi_index_degree(const MultiIndex& alpha);

//! t^alpha with the 0^0 = 1 convention.
double multi_index_power(std::span<const double> t, const MultiIndex& alpha);

//! Exact n-choose-k. Guarded at n <= 62 so the result fits 64 bits.
std::uint64_t binomial(int n, int k);

}  // namespace fastsum
