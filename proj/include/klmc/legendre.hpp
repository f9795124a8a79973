#ifndef KLMC_LEGENDRE_HPP_
#define KLMC_LEGENDRE_HPP_

#include <cmath>
#include <algorithm>
#include <string>
#include <vector>

#include "klmc/core.hpp"

namespace klmc {

/// Largest basis size K for which monomial-coefficient routes are offered.
inline constexpr Index kMaxExactLegendreOrder = 30;

using Int128 = __int128;

/// Binomial coefficient, exact for n <= 60.
inline Int128 binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  Int128 c = 1;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;  // stays integral at each step
  return c;
}

/// Monomial coefficient a_{k,j} of the shifted Legendre polynomial
/// q_k(t) = P_k(2t - 1) = sum_j a_{k,j} t^j (Rodrigues):
/// a_{k,j} = (-1)^{k+j} C(k,j) C(k+j,j).
///
/// |a_{k,j}| exceeds 2^63 from k = 28 on, hence 128-bit storage.
inline Int128 shifted_legendre_coefficient(int k, int j) {
  if (j < 0 || j > k) return 0;
  const Int128 mag = binomial(k, j) * binomial(k + j, j);
  return ((k + j) % 2 == 0) ? mag : -mag;
}

inline void require_exact_order(Index order, const char* who) {
  if (order > kMaxExactLegendreOrder)
    throw UnsupportedOrder(std::string(who) + ": order above 30 is not supported");
}

/// Normalized shifted Legendre polynomials F_0..F_{K-1} on [0, T] evaluated
/// at one point by the three-term recurrence (stable for any order).
template <typename Scalar>
void shifted_legendre_values(Scalar t, Scalar horizon, Index count, Scalar* out) {
  const Scalar u = Scalar(2) * t / horizon - Scalar(1);
  Scalar prev = Scalar(1), cur = u;
  for (Index k = 0; k < count; ++k) {
    Scalar p;
    if (k == 0) {
      p = Scalar(1);
    } else if (k == 1) {
      p = u;
    } else {
      p = (Scalar(2 * k - 1) * u * cur - Scalar(k - 1) * prev) / Scalar(k);
      prev = cur;
      cur = p;
    }
    out[k] = std::sqrt(Scalar(2 * k + 1) / horizon) * p;
  }
}

}  // namespace klmc

#endif  // KLMC_LEGENDRE_HPP_
