#pragma once

#include <span>
#include <stdexcept>

namespace fastsum {

//! Evaluates a polynomial given its coefficients HIGHEST degree first:
//! coeffs = [c0, ..., c_{m-1}] -> c0*x^{m-1} + ... + c_{m-1},
//! via the fused accumulate y <- c_i + x*y.
template <class Real>
Real horner_eval(std::span<const Real> coeffs, Real x) {
  if (coeffs.empty()) throw std::invalid_argument("horner_eval: empty coefficient list");
  Real y = coeffs[0];
  for (std::size_t i = 1; i < coeffs.size(); ++i) {
    y = coeffs[i] + x * y;
  }
  return y;
}

}  // namespace fastsum
