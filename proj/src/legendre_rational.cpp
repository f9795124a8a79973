#include <boost/multiprecision/cpp_int.hpp>

#include "klmc/signature.hpp"

namespace klmc {

namespace {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

constexpr Index kMaxRationalOrder = 20;

cpp_int to_cpp_int(Int128 v) {
  const bool neg = v < 0;
  unsigned __int128 mag = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1
                              : static_cast<unsigned __int128>(v);
  cpp_int out = static_cast<std::uint64_t>(mag >> 64);
  out <<= 64;
  out += static_cast<std::uint64_t>(mag);
  return neg ? cpp_int(-out) : out;
}

std::vector<cpp_rational> exact_eigenvalues(Index count) {
  if (count < 1) throw InvalidArgument("legendre_bm_eigenvalues: K must be >= 1");
  if (count > kMaxRationalOrder)
    throw UnsupportedOrder("legendre_bm_eigenvalues: K above 20 is not supported");
  std::vector<cpp_rational> out;
  for (int k = 0; k < count; ++k) {
    cpp_rational sum = 0;
    for (int j = 0; j <= k; ++j)
      for (int i = 0; i <= k; ++i)
        sum += cpp_rational(to_cpp_int(shifted_legendre_coefficient(k, j)) *
                                to_cpp_int(shifted_legendre_coefficient(k, i)),
                            cpp_int((j + 2) * (i + j + 3)));
    out.push_back(sum * 2 * (2 * k + 1));
  }
  return out;
}

}  // namespace

std::vector<Rational> legendre_bm_eigenvalues(Index count) {
  std::vector<Rational> out;
  for (const auto& q : exact_eigenvalues(count)) {
    if (q < 0) throw UnsupportedOrder("legendre_bm_eigenvalues: negative eigenvalue");
    out.push_back({numerator(q).str(), denominator(q).str(), q.convert_to<double>()});
  }
  return out;
}

bool legendre_eigenvalue_closed_form_holds(Index count) {
  const auto lambda = exact_eigenvalues(count);
  for (int k = 1; k < count; ++k)
    if (lambda[size_t(k)] != cpp_rational(1, (2 * k + 3) * (4 * k - 2))) return false;
  return true;
}

bool legendre_eigenvalue_partial_sum_holds(Index upto) {
  const auto lambda = exact_eigenvalues(upto + 1);
  cpp_rational sum = 0;
  for (const auto& q : lambda) sum += q;
  const int K = static_cast<int>(upto);
  return sum == cpp_rational(1, 2) - cpp_rational(K + 1, (2 * K + 3) * (4 * K + 2));
}

}  // namespace klmc
