#ifndef KLMC_BASES_HPP_
#define KLMC_BASES_HPP_

#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>

#include "klmc/grid.hpp"
#include "klmc/legendre.hpp"

namespace klmc {

enum class BasisFamily { bm_kl, bb_kl_cosine, cm_cosine, haar_schauder, shifted_legendre, empirical_kl };

inline std::string to_string(BasisFamily f) {
  switch (f) {
    case BasisFamily::bm_kl: return "bm_kl";
    case BasisFamily::bb_kl_cosine: return "bb_kl_cosine";
    case BasisFamily::cm_cosine: return "cm_cosine";
    case BasisFamily::haar_schauder: return "haar_schauder";
    case BasisFamily::shifted_legendre: return "shifted_legendre";
    case BasisFamily::empirical_kl: return "empirical_kl";
  }
  return "?";
}

/// Inner product in which a family is orthonormal.
///  - l2: Sum'' f g dt (trapezoid).
///  - cameron_martin: integral of f' g' for the piecewise-linear interpolants,
///    i.e. sum_n (df_n)(dg_n) / dt. Paths are represented as x_0 + sum xi_k F_k.
enum class InnerProduct { l2, cameron_martin };

/// K basis functions sampled on a grid, row k = F_k. Immutable; copies share
/// storage.
template <typename Scalar = double>
class Basis {
 public:
  Basis(TimeGrid<Scalar> grid, RowMatrix<Scalar> functions, BasisFamily family,
        InnerProduct inner, std::string ordering,
        std::optional<Vector<Scalar>> eigenvalues = std::nullopt)
      : data_(std::make_shared<Data>(Data{std::move(grid), std::move(functions), family, inner,
                                          std::move(ordering), std::move(eigenvalues)})) {
    require(data_->functions.cols() == data_->grid.size(), "Basis: columns must equal N+1");
    if (data_->eigenvalues)
      require(data_->eigenvalues->size() == data_->functions.rows(),
              "Basis: one eigenvalue per function");
  }

  const TimeGrid<Scalar>& grid() const { return data_->grid; }
  const RowMatrix<Scalar>& functions() const { return data_->functions; }
  Index size() const { return data_->functions.rows(); }
  BasisFamily family() const { return data_->family; }
  InnerProduct inner_product() const { return data_->inner; }
  const std::string& ordering() const { return data_->ordering; }
  const std::optional<Vector<Scalar>>& eigenvalues() const { return data_->eigenvalues; }

 private:
  struct Data {
    TimeGrid<Scalar> grid;
    RowMatrix<Scalar> functions;
    BasisFamily family;
    InnerProduct inner;
    std::string ordering;
    std::optional<Vector<Scalar>> eigenvalues;
  };
  std::shared_ptr<const Data> data_;
};

/// xi_1..xi_K of one path; `origin` is x_0 for Cameron-Martin families.
template <typename Scalar = double>
struct Coefficients {
  Vector<Scalar> values;
  Basis<Scalar> basis;
  Scalar origin = Scalar(0);
};

// ---------------------------------------------------------------------------
// Families. All formulas are the T = 1 ones mapped by t -> t/T; functions
// pick up 1/sqrt(T) (L2) or sqrt(T) (Cameron-Martin) and eigenvalues T^2.

/// Karhunen-Loeve basis of Brownian motion:
/// F_k(t) = sqrt(2/T) sin((k - 1/2) pi t / T), lambda_k = T^2 / (pi^2 (k - 1/2)^2).
template <typename Scalar = double>
Basis<Scalar> bm_kl_basis(const TimeGrid<Scalar>& grid, Index count) {
  require(count >= 1, "bm_kl_basis: K must be >= 1");
  const Scalar T = grid.horizon();
  const Scalar pi = std::numbers::pi_v<Scalar>;
  RowMatrix<Scalar> F(count, grid.size());
  Vector<Scalar> lambda(count);
  for (Index k = 0; k < count; ++k) {
    const Scalar freq = (Scalar(k) + Scalar(0.5)) * pi;
    lambda[k] = T * T / (freq * freq);
    for (Index n = 0; n < grid.size(); ++n)
      F(k, n) = std::sqrt(Scalar(2) / T) * std::sin(freq * grid.node(n) / T);
  }
  return Basis<Scalar>(grid, std::move(F), BasisFamily::bm_kl, InnerProduct::l2,
                       "k = 1..K by decreasing eigenvalue", std::move(lambda));
}

/// Cosine Levy-Cieselski family and the Brownian-bridge KL family.
/// cameron_martin: F_k = sqrt(2T) sin(pi k t / T) / (pi k), orthonormal in the
/// Cameron-Martin product; bb_kl: sqrt(2/T) sin(pi k t / T), lambda_k = T^2/(pi k)^2.
template <typename Scalar = double>
std::pair<Basis<Scalar>, Basis<Scalar>> bb_cosine_bases(const TimeGrid<Scalar>& grid, Index count) {
  require(count >= 1, "bb_cosine_bases: K must be >= 1");
  const Scalar T = grid.horizon();
  const Scalar pi = std::numbers::pi_v<Scalar>;
  RowMatrix<Scalar> cm(count, grid.size()), bb(count, grid.size());
  Vector<Scalar> lambda(count);
  for (Index k = 0; k < count; ++k) {
    const Scalar freq = Scalar(k + 1) * pi;
    lambda[k] = T * T / (freq * freq);
    for (Index n = 0; n < grid.size(); ++n) {
      const Scalar s = std::sin(freq * grid.node(n) / T);
      cm(k, n) = std::sqrt(Scalar(2) * T) * s / freq;
      bb(k, n) = std::sqrt(Scalar(2) / T) * s;
    }
  }
  return {Basis<Scalar>(grid, std::move(cm), BasisFamily::cm_cosine, InnerProduct::cameron_martin,
                        "k = 1..K by frequency"),
          Basis<Scalar>(grid, std::move(bb), BasisFamily::bb_kl_cosine, InnerProduct::l2,
                        "k = 1..K by decreasing eigenvalue", std::move(lambda))};
}

/// Schauder functions (integrated Haar wavelets), Cameron-Martin orthonormal.
///
/// Row 0 is t / sqrt(T) (terminal value); then wavelet levels k = 0..levels-1,
/// l = 0..2^k-1, with F_{k,l} supported on [l T/2^k, (l+1) T/2^k]. Total 2^levels
/// functions, i.e. 2^levels - 1 wavelet rows plus the terminal row.
template <typename Scalar = double>
Basis<Scalar> haar_schauder_basis(const TimeGrid<Scalar>& grid, Index levels) {
  require(levels >= 0 && levels < 30, "haar_schauder_basis: levels must be in [0, 30)");
  const Index breakpoints = Index(1) << (levels + 1);
  require(grid.intervals() % breakpoints == 0,
          "haar_schauder_basis: N must be divisible by 2^(levels+1)");
  const Scalar T = grid.horizon();
  const Index count = Index(1) << levels;
  const Index N = grid.intervals();
  RowMatrix<Scalar> F = RowMatrix<Scalar>::Zero(count, grid.size());
  for (Index n = 0; n < grid.size(); ++n) F(0, n) = grid.node(n) / std::sqrt(T);
  Index row = 1;
  for (Index k = 0; k < levels; ++k) {
    const Index width = N >> k;  // nodes per support interval, exact by divisibility
    const Scalar peak_scale = std::sqrt(T) / std::sqrt(Scalar(Index(1) << k));
    for (Index l = 0; l < (Index(1) << k); ++l, ++row) {
      for (Index i = 0; i <= width; ++i) {
        const Scalar u = Scalar(i) / Scalar(width);
        F(row, l * width + i) = peak_scale * (u <= Scalar(0.5) ? u : Scalar(1) - u);
      }
    }
  }
  return Basis<Scalar>(grid, std::move(F), BasisFamily::haar_schauder,
                       InnerProduct::cameron_martin,
                       "terminal t/sqrt(T), then level k = 0..levels-1, l = 0..2^k-1");
}

/// Normalized shifted Legendre polynomials F_k = sqrt((2k+1)/T) P_k(2t/T - 1),
/// rows k = 0..K-1 by degree.
template <typename Scalar = double>
Basis<Scalar> shifted_legendre_basis(const TimeGrid<Scalar>& grid, Index count) {
  require(count >= 1, "shifted_legendre_basis: K must be >= 1");
  RowMatrix<Scalar> F(count, grid.size());
  Vector<Scalar> col(count);
  for (Index n = 0; n < grid.size(); ++n) {
    shifted_legendre_values(grid.node(n), grid.horizon(), count, col.data());
    F.col(n) = col;
  }
  return Basis<Scalar>(grid, std::move(F), BasisFamily::shifted_legendre, InnerProduct::l2,
                       "k = 0..K-1 by degree");
}

inline BasisFamily parse_family(const std::string& name) {
  for (auto f : {BasisFamily::bm_kl, BasisFamily::bb_kl_cosine, BasisFamily::cm_cosine,
                 BasisFamily::haar_schauder, BasisFamily::shifted_legendre,
                 BasisFamily::empirical_kl})
    if (to_string(f) == name) return f;
  throw InvalidArgument("unknown basis family '" + name + "'");
}

/// First `count` functions of a data-free family, complete enough to carry a
/// Brownian path. Haar/Schauder rows are taken from the smallest complete
/// level set holding `count` functions.
template <typename Scalar = double>
Basis<Scalar> fixed_basis(BasisFamily family, const TimeGrid<Scalar>& grid, Index count) {
  require(count >= 1, "fixed_basis: K must be >= 1");
  switch (family) {
    case BasisFamily::bm_kl: return bm_kl_basis(grid, count);
    case BasisFamily::bb_kl_cosine: return bb_cosine_bases(grid, count).second;
    case BasisFamily::cm_cosine: {
      // The cosine ONB's constant element integrates to the terminal-value
      // function; without it the family only spans bridges.
      RowMatrix<Scalar> F(count, grid.size());
      for (Index n = 0; n < grid.size(); ++n) F(0, n) = grid.node(n) / std::sqrt(grid.horizon());
      if (count > 1) F.bottomRows(count - 1) = bb_cosine_bases(grid, count - 1).first.functions();
      return Basis<Scalar>(grid, std::move(F), family, InnerProduct::cameron_martin,
                           "terminal t/sqrt(T), then k = 1..K-1 by frequency");
    }
    case BasisFamily::shifted_legendre: return shifted_legendre_basis(grid, count);
    case BasisFamily::haar_schauder: {
      Index levels = 0;
      while ((Index(1) << levels) < count) ++levels;
      const auto full = haar_schauder_basis(grid, levels);
      if (full.size() == count) return full;
      return Basis<Scalar>(grid, full.functions().topRows(count), family, full.inner_product(),
                           full.ordering());
    }
    case BasisFamily::empirical_kl: break;
  }
  throw InvalidArgument("fixed_basis: empirical_kl is estimated from data (use solve_eigen)");
}

// ---------------------------------------------------------------------------
// Projection.

/// Gram matrix of the basis in its own inner product.
template <typename Scalar>
Matrix<Scalar> gram(const Basis<Scalar>& basis) {
  const auto& F = basis.functions();
  if (basis.inner_product() == InnerProduct::l2) {
    const Vector<Scalar> w = basis.grid().trapezoid_weights();
    return F * w.asDiagonal() * F.transpose();
  }
  const Index N = basis.grid().intervals();
  const Matrix<Scalar> dF = F.rightCols(N) - F.leftCols(N);
  return dF * dF.transpose() / basis.grid().step();
}

/// Trapezoidal L2 Gram matrix regardless of family.
template <typename Scalar>
Matrix<Scalar> l2_gram(const Basis<Scalar>& basis) {
  const Vector<Scalar> w = basis.grid().trapezoid_weights();
  return basis.functions() * w.asDiagonal() * basis.functions().transpose();
}

/// Coefficients of every path at once: J x K.
template <typename Scalar>
Matrix<Scalar> project_ensemble(const PathEnsemble<Scalar>& ensemble, const Basis<Scalar>& basis) {
  require(ensemble.grid() == basis.grid(), "project: path and basis grids differ");
  const auto& X = ensemble.values();
  const auto& F = basis.functions();
  if (basis.inner_product() == InnerProduct::l2) {
    const Vector<Scalar> w = basis.grid().trapezoid_weights();
    return X * (w.asDiagonal() * F.transpose());
  }
  const Index N = basis.grid().intervals();
  const Matrix<Scalar> dX = X.rightCols(N) - X.leftCols(N);
  const Matrix<Scalar> dF = F.rightCols(N) - F.leftCols(N);
  return dX * dF.transpose() / basis.grid().step();
}

/// Reconstructed paths (J x (N+1)) from the first `upto` coefficients.
template <typename Scalar, typename Derived>
RowMatrix<Scalar> reconstruct_ensemble(const Eigen::MatrixBase<Derived>& coeffs,
                                       const Basis<Scalar>& basis, Index upto,
                                       const Vector<Scalar>& origins) {
  require(upto >= 0 && upto <= basis.size() && upto <= coeffs.cols(),
          "reconstruct: K' exceeds the number of coefficients");
  RowMatrix<Scalar> out = coeffs.leftCols(upto) * basis.functions().topRows(upto);
  if (basis.inner_product() == InnerProduct::cameron_martin) out.colwise() += origins;
  return out;
}

/// xi_k = (x, F_k) in the basis' inner product.
template <typename Scalar>
Coefficients<Scalar> project(const DiscretePath<Scalar>& path, const Basis<Scalar>& basis) {
  require(path.grid() == basis.grid(), "project: path and basis grids differ");
  const auto& F = basis.functions();
  const auto& x = path.values();
  Coefficients<Scalar> c{Vector<Scalar>(basis.size()), basis, Scalar(0)};
  if (basis.inner_product() == InnerProduct::l2) {
    const Vector<Scalar> w = basis.grid().trapezoid_weights();
    c.values = F * w.cwiseProduct(x);
  } else {
    const Index N = basis.grid().intervals();
    const Vector<Scalar> dx = x.tail(N) - x.head(N);
    c.values = (F.rightCols(N) - F.leftCols(N)) * dx / basis.grid().step();
    c.origin = x[0];
  }
  return c;
}

/// x^{K'} = sum_{k <= K'} xi_k F_k (plus x_0 for Cameron-Martin families).
template <typename Scalar>
DiscretePath<Scalar> reconstruct(const Coefficients<Scalar>& coeffs, Index upto) {
  require(upto >= 0 && upto <= coeffs.values.size(), "reconstruct: K' exceeds K");
  const auto& basis = coeffs.basis;
  Vector<Scalar> x = basis.functions().topRows(upto).transpose() * coeffs.values.head(upto);
  if (basis.inner_product() == InnerProduct::cameron_martin) x.array() += coeffs.origin;
  return DiscretePath<Scalar>(basis.grid(), std::move(x));
}

namespace detail {

template <typename Scalar>
Vector<Scalar> origins_of(const PathEnsemble<Scalar>& e) {
  return e.values().col(0);
}

/// Mean over rows of the trapezoidal integral of squared entries.
template <typename Scalar, typename Derived>
Scalar mean_l2_sq(const TimeGrid<Scalar>& grid, const Eigen::MatrixBase<Derived>& M) {
  const Vector<Scalar> w = grid.trapezoid_weights();
  return (M.array().square().matrix() * w).mean();
}

}  // namespace detail

/// Monte Carlo estimate of || X - X^{K'} ||^2 in L2(Q x dt).
template <typename Scalar>
Scalar l2_error_ensemble(const PathEnsemble<Scalar>& ensemble, const Basis<Scalar>& basis,
                         Index upto) {
  const Matrix<Scalar> xi = project_ensemble(ensemble, basis);
  const RowMatrix<Scalar> approx =
      reconstruct_ensemble(xi, basis, upto, detail::origins_of(ensemble));
  return detail::mean_l2_sq(ensemble.grid(), ensemble.values() - approx);
}

/// ||X^{K'}||^2 / ||X||^2 in L2(Q x dt).
template <typename Scalar>
Scalar variance_explained(const PathEnsemble<Scalar>& ensemble, const Basis<Scalar>& basis,
                          Index upto) {
  const Scalar total = detail::mean_l2_sq(ensemble.grid(), ensemble.values());
  if (!(total > Scalar(0))) throw DegenerateInput("variance_explained: zero total variance");
  const Matrix<Scalar> xi = project_ensemble(ensemble, basis);
  const RowMatrix<Scalar> approx =
      reconstruct_ensemble(xi, basis, upto, detail::origins_of(ensemble));
  return detail::mean_l2_sq(ensemble.grid(), approx) / total;
}

}  // namespace klmc

#endif  // KLMC_BASES_HPP_
