#ifndef KLMC_SIGNATURE_HPP_
#define KLMC_SIGNATURE_HPP_

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "klmc/bases.hpp"
#include "klmc/legendre.hpp"

namespace klmc {

/// Word over the alphabet {0, 1}: letter 0 is time, letter 1 the path.
class Word {
 public:
  Word() = default;
  explicit Word(std::string letters) : letters_(std::move(letters)) {
    require(std::all_of(letters_.begin(), letters_.end(), [](char c) { return c == '0' || c == '1'; }),
            "Word: letters must be 0 or 1");
  }

  /// alpha^(k) = 1 followed by k+1 zeros.
  static Word time_weighted(Index k) { return Word("1" + std::string(static_cast<size_t>(k + 1), '0')); }

  const std::string& str() const { return letters_; }
  Index length() const { return static_cast<Index>(letters_.size()); }
  bool empty() const { return letters_.empty(); }
  char operator[](Index i) const { return letters_[static_cast<size_t>(i)]; }
  Word prefix(Index len) const { return Word(letters_.substr(0, static_cast<size_t>(len))); }

  // Shortlex: by length, then lexicographic.
  friend bool operator<(const Word& a, const Word& b) {
    if (a.length() != b.length()) return a.length() < b.length();
    return a.letters_ < b.letters_;
  }
  friend bool operator==(const Word& a, const Word& b) { return a.letters_ == b.letters_; }

 private:
  std::string letters_;
};

/// Every word of length <= max_length, shortlex order (2^{max_length+1} - 1 words).
inline std::vector<Word> words_up_to(Index max_length) {
  std::vector<Word> out{Word()};
  for (Index len = 1; len <= max_length; ++len)
    for (Index code = 0; code < (Index(1) << len); ++code) {
      std::string s(static_cast<size_t>(len), '0');
      for (Index i = 0; i < len; ++i)
        if (code & (Index(1) << (len - 1 - i))) s[static_cast<size_t>(i)] = '1';
      out.emplace_back(std::move(s));
    }
  return out;
}

/// S_alpha(X_{t_n}) for n = 0..N, one entry per requested word.
template <typename Scalar = double>
struct SignatureValues {
  TimeGrid<Scalar> grid;
  std::map<Word, Vector<Scalar>> terms;

  const Vector<Scalar>& operator[](const Word& w) const { return terms.at(w); }
};

namespace detail {

/// Words sorted shortlex with the prefix structure resolved: for word i,
/// prefix[i][l] is the index of its length-l prefix (0 = empty word).
struct WordTable {
  std::vector<Word> words;  // words[0] is the empty word
  std::vector<std::vector<Index>> prefix;
};

inline WordTable make_word_table(const std::vector<Word>& requested) {
  std::set<Word> all(requested.begin(), requested.end());
  all.insert(Word());
  WordTable table;
  table.words.assign(all.begin(), all.end());
  std::map<Word, Index> index;
  for (Index i = 0; i < static_cast<Index>(table.words.size()); ++i) index[table.words[i]] = i;
  for (const auto& w : table.words) {
    std::vector<Index> p(static_cast<size_t>(w.length()) + 1);
    for (Index l = 0; l <= w.length(); ++l) {
      auto it = index.find(w.prefix(l));
      if (it == index.end())
        throw InvalidArgument("signature_terms: word set is not prefix-closed (missing '" +
                              w.prefix(l).str() + "' for '" + w.str() + "')");
      p[static_cast<size_t>(l)] = it->second;
    }
    table.prefix.push_back(std::move(p));
  }
  return table;
}

/// Fills out (nodes x words) with the signature of one piecewise-linear path.
///
/// Chen's relation on each linear segment with increment (dt, dx):
///   S_w(n+1) = sum_{l=0}^{|w|} S_{w[:l]}(n) * prod_{i>=l} d^{w_i} / (|w| - l)!
/// which is exact for piecewise-linear paths. Time-only words use t^k/k! directly.
template <typename Scalar>
void signature_into(const TimeGrid<Scalar>& grid, const Scalar* x, const WordTable& table,
                    RowMatrix<Scalar>& out) {
  const Index W = static_cast<Index>(table.words.size());
  const Scalar dt = grid.step();
  const Index nodes = grid.size();
  out.resize(nodes, W);
  out.row(0).setZero();
  out(0, 0) = Scalar(1);
  Index max_len = 0;
  for (const auto& w : table.words) max_len = std::max(max_len, w.length());
  std::vector<Scalar> inv_fact(static_cast<size_t>(max_len) + 1, Scalar(1));
  for (Index k = 1; k <= max_len; ++k) inv_fact[size_t(k)] = inv_fact[size_t(k - 1)] / Scalar(k);

  std::vector<bool> time_only(static_cast<size_t>(W));
  for (Index i = 0; i < W; ++i)
    time_only[size_t(i)] = table.words[size_t(i)].str().find('1') == std::string::npos;

  for (Index n = 0; n + 1 < nodes; ++n) {
    const Scalar inc[2] = {dt, x[n + 1] - x[n]};
    const Scalar t_next = grid.node(n + 1);
    out(n + 1, 0) = Scalar(1);
    for (Index i = 1; i < W; ++i) {
      const Word& w = table.words[size_t(i)];
      const Index len = w.length();
      if (time_only[size_t(i)]) {
        out(n + 1, i) = std::pow(t_next, Scalar(len)) * inv_fact[size_t(len)];
        continue;
      }
      // Horner over the suffix products, from the longest prefix down.
      Scalar acc = out(n, i);
      Scalar tail = Scalar(1);
      for (Index l = len - 1; l >= 0; --l) {
        tail *= inc[w[l] - '0'];
        acc += out(n, table.prefix[size_t(i)][size_t(l)]) * tail * inv_fact[size_t(len - l)];
      }
      out(n + 1, i) = acc;
    }
  }
}

}  // namespace detail

/// Signature terms of the time-augmented path read as piecewise linear.
template <typename Scalar>
SignatureValues<Scalar> signature_terms(const DiscretePath<Scalar>& path,
                                        const std::vector<Word>& words) {
  const auto table = detail::make_word_table(words);
  RowMatrix<Scalar> values;
  detail::signature_into(path.grid(), path.values().data(), table, values);
  SignatureValues<Scalar> out{path.grid(), {}};
  for (const auto& w : words) {
    const auto it = std::find(table.words.begin(), table.words.end(), w);
    out.terms[w] = values.col(it - table.words.begin());
  }
  return out;
}

template <typename Scalar>
DiscretePath<Scalar> time_reverse(const DiscretePath<Scalar>& path) {
  return DiscretePath<Scalar>(path.grid(), path.values().reverse());
}

/// S_{alpha^(k)}(X_T) = int_0^T (x_s - x_0) (T - s)^k / k! ds, k = 0..K-1, by
/// the trapezoid rule on the nodes.
template <typename Scalar>
Vector<Scalar> iterated_time_integrals(const DiscretePath<Scalar>& path, Index count) {
  require(count >= 1, "iterated_time_integrals: K must be >= 1");
  const auto& grid = path.grid();
  const Vector<Scalar> w = grid.trapezoid_weights();
  const Vector<Scalar> x = path.values().array() - path[0];
  Vector<Scalar> kernel = Vector<Scalar>::Ones(grid.size());
  Vector<Scalar> out(count);
  for (Index k = 0; k < count; ++k) {
    if (k > 0)
      for (Index n = 0; n < grid.size(); ++n)
        kernel[n] *= (grid.horizon() - grid.node(n)) / Scalar(k);
    out[k] = (w.cwiseProduct(kernel)).dot(x);
  }
  return out;
}

namespace detail {

/// (x - x_0, m_j) / j! for j = 0..K-1, read off the signature of the reversed
/// path. The reversed path starts at x_T rather than 0, so
///   S_{alpha^(j)}(reversed X_T) = (x - x_0, m_j)/j! - (x_T - x_0) T^{j+1}/(j+1)!
/// and the increment x_T - x_0 = -S_1(reversed X_T) is added back.
template <typename Scalar>
Vector<Scalar> reversed_moment_terms(const DiscretePath<Scalar>& path, Index count) {
  std::vector<Word> words;
  for (Index len = 1; len <= count + 1; ++len)
    words.emplace_back("1" + std::string(static_cast<size_t>(len - 1), '0'));
  const auto sig = signature_terms(time_reverse(path), words);
  const Index last = path.grid().intervals();
  const Scalar increment = -sig[Word("1")][last];
  const Scalar T = path.grid().horizon();
  Vector<Scalar> s(count);
  Scalar scale = T;  // T^{j+1} / (j+1)!
  for (Index j = 0; j < count; ++j) {
    s[j] = sig[Word::time_weighted(j)][last] + increment * scale;
    scale *= T / Scalar(j + 2);
  }
  return s;
}

/// b_{k,j} T^{-j-1/2} = sqrt(2k+1) j! a_{k,j} T^{-j-1/2}, lower triangular K x K.
template <typename Scalar>
Matrix<Scalar> signature_to_legendre(Index count, Scalar horizon) {
  Matrix<Scalar> b = Matrix<Scalar>::Zero(count, count);
  for (Index k = 0; k < count; ++k) {
    Scalar fact = Scalar(1);
    for (Index j = 0; j <= k; ++j) {
      if (j > 0) fact *= Scalar(j);
      b(k, j) = std::sqrt(Scalar(2 * k + 1)) * fact *
                static_cast<Scalar>(static_cast<long double>(shifted_legendre_coefficient(int(k), int(j)))) *
                std::pow(horizon, -Scalar(j) - Scalar(0.5));
    }
  }
  return b;
}

}  // namespace detail

/// Legendre coefficients recovered from the signature of the time-reversed
/// path: xi_k = sum_{j<=k} b_{k,j} (x - x_0, m_j)/j!, the moments coming from
/// S_{alpha^(j)} and S_1 of the reversed path. x_0 only enters xi_0.
template <typename Scalar>
Coefficients<Scalar> legendre_coeffs_from_signature(const DiscretePath<Scalar>& path, Index count) {
  require(count >= 1, "legendre_coeffs_from_signature: K must be >= 1");
  require_exact_order(count, "legendre_coeffs_from_signature");
  const Scalar T = path.grid().horizon();
  const Vector<Scalar> s = detail::reversed_moment_terms(path, count);
  Vector<Scalar> xi = detail::signature_to_legendre(count, T) * s;
  xi[0] += path[0] * std::sqrt(T);
  return {std::move(xi), shifted_legendre_basis(path.grid(), count), Scalar(0)};
}

/// x^K(t) = x_0 + sum_j (x - x_0, m_j)/j! G_j(t),
/// G_j = sum_{k=j}^{K-1} b_{k,j} F_k.
template <typename Scalar>
DiscretePath<Scalar> signature_reconstruct(const DiscretePath<Scalar>& path, Index count) {
  require(count >= 1, "signature_reconstruct: K must be >= 1");
  require_exact_order(count, "signature_reconstruct");
  const auto basis = shifted_legendre_basis(path.grid(), count);
  const Matrix<Scalar> b = detail::signature_to_legendre(count, path.grid().horizon());
  const RowMatrix<Scalar> G = b.transpose() * basis.functions();  // row j = G_j
  const Vector<Scalar> s = detail::reversed_moment_terms(path, count);
  Vector<Scalar> x = G.transpose() * s;
  x.array() += path[0];
  return DiscretePath<Scalar>(path.grid(), std::move(x));
}

/// Result of the signature-payoff fit y ~ sum_{|alpha| <= level} c_alpha S_alpha(X).
template <typename Scalar = double>
struct SignatureRegression {
  std::map<Word, Scalar> coefficients;
  Scalar relative_residual;  // ||Y - fit||_* / ||Y||_*
};

/// Weighted least squares over every (path, node) sample with trapezoid time
/// weights. Columns are standardized before the ridge penalty is applied and
/// coefficients are mapped back afterwards; the empty word is the intercept.
template <typename Scalar>
SignatureRegression<Scalar> signature_payoff_regression(const PathEnsemble<Scalar>& paths,
                                                        const PathEnsemble<Scalar>& transformed,
                                                        Index level, Scalar ridge) {
  require(paths.grid() == transformed.grid() && paths.paths() == transformed.paths(),
          "signature_payoff_regression: X and Y must share grid and J");
  require(level >= 0 && level <= 5, "signature_payoff_regression: level must be in [0, 5]");
  require(ridge >= Scalar(0), "signature_payoff_regression: ridge must be >= 0");

  const auto words = words_up_to(level);
  const auto table = detail::make_word_table(words);
  const Index W = static_cast<Index>(table.words.size());
  const auto& grid = paths.grid();
  const Vector<Scalar> w = grid.trapezoid_weights();
  const Scalar total_weight = w.sum() * Scalar(paths.paths());

  // Weighted moments accumulated path by path: sums of z, z z^T, z y, y, y^2.
  Vector<Scalar> sz = Vector<Scalar>::Zero(W), szy = Vector<Scalar>::Zero(W);
  Matrix<Scalar> szz = Matrix<Scalar>::Zero(W, W);
  Scalar sy = 0, syy = 0;
  RowMatrix<Scalar> S;
  for (Index j = 0; j < paths.paths(); ++j) {
    detail::signature_into(grid, paths.values().row(j).data(), table, S);
    const Vector<Scalar> y = transformed.values().row(j).transpose();
    const Matrix<Scalar> Sw = w.asDiagonal() * S;
    sz += Sw.colwise().sum().transpose();
    szz.noalias() += S.transpose() * Sw;
    szy.noalias() += Sw.transpose() * y;
    sy += w.dot(y);
    syy += w.dot(y.cwiseAbs2());
  }

  // Non-constant columns, standardized.
  const Index P = W - 1;
  const Vector<Scalar> mean = sz.tail(P) / total_weight;
  const Scalar y_mean = sy / total_weight;
  Matrix<Scalar> cov = szz.bottomRightCorner(P, P) / total_weight - mean * mean.transpose();
  Vector<Scalar> cov_y = szy.tail(P) / total_weight - mean * y_mean;

  Vector<Scalar> sd = cov.diagonal().cwiseMax(Scalar(0)).cwiseSqrt();
  for (Index i = 0; i < P; ++i)
    if (!(sd[i] > Scalar(0))) {
      if (ridge == Scalar(0))
        throw RankDeficient("signature_payoff_regression: constant signature column '" +
                            table.words[size_t(i + 1)].str() + "'; raise the ridge");
      sd[i] = Scalar(1);
    }
  const Vector<Scalar> inv_sd = sd.cwiseInverse();
  Matrix<Scalar> corr = inv_sd.asDiagonal() * cov * inv_sd.asDiagonal();
  const Vector<Scalar> rhs = inv_sd.asDiagonal() * cov_y;
  corr.diagonal().array() += ridge;

  Vector<Scalar> beta_std;
  if (P > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(corr);
    const Scalar top = es.eigenvalues().maxCoeff();
    if (ridge == Scalar(0) && es.eigenvalues().minCoeff() <= Scalar(1e-14) * top)
      throw RankDeficient("signature_payoff_regression: collinear signature columns; raise the ridge");
    beta_std = es.eigenvectors() *
               (es.eigenvalues().cwiseInverse().asDiagonal() * (es.eigenvectors().transpose() * rhs));
  } else {
    beta_std.resize(0);
  }

  const Vector<Scalar> beta = inv_sd.cwiseProduct(beta_std);
  const Scalar intercept = y_mean - mean.dot(beta);

  // Residual in a second pass; the moment form cancels badly for near-exact fits.
  Vector<Scalar> full(W);
  full[0] = intercept;
  full.tail(P) = beta;
  Scalar resid = 0;
  for (Index j = 0; j < paths.paths(); ++j) {
    detail::signature_into(grid, paths.values().row(j).data(), table, S);
    const Vector<Scalar> r = transformed.values().row(j).transpose() - S * full;
    resid += w.dot(r.cwiseAbs2());
  }

  SignatureRegression<Scalar> out;
  out.coefficients[table.words[0]] = intercept;
  for (Index i = 0; i < P; ++i) out.coefficients[table.words[size_t(i + 1)]] = beta[i];
  out.relative_residual = syy > Scalar(0) ? std::sqrt(resid / syy) : Scalar(0);
  return out;
}

/// Brownian eigenvalues of the shifted Legendre basis, exact rationals.
/// lambda_k = 2(2k+1) sum_{i,j<=k} a_{k,j} a_{k,i} / ((j+2)(i+j+3)), k = 0..K-1.
struct Rational {
  std::string numerator;
  std::string denominator;
  double value;
};

std::vector<Rational> legendre_bm_eigenvalues(Index count);

/// Checks lambda_k == 1/((2k+3)(4k-2)) exactly for k = 1..K-1.
bool legendre_eigenvalue_closed_form_holds(Index count);

/// Checks sum_{k=0}^{K} lambda_k == 1/2 - (K+1)/((2K+3)(4K+2)) exactly.
bool legendre_eigenvalue_partial_sum_holds(Index upto);

}  // namespace klmc

#endif  // KLMC_SIGNATURE_HPP_
