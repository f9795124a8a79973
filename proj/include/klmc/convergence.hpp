#ifndef KLMC_CONVERGENCE_HPP_
#define KLMC_CONVERGENCE_HPP_

#include <algorithm>
#include <cmath>
#include <vector>

#include "klmc/bases.hpp"
#include "klmc/functional.hpp"
#include "klmc/kernel.hpp"

namespace klmc {

/// Projection P(Z) = zbar + pi(Z - zbar) grown one block of basis functions
/// at a time, so nested truncations cost one rank update each.
template <typename Scalar = double>
class ProgressiveProjection {
 public:
  ProgressiveProjection(const PathEnsemble<Scalar>& z, Basis<Scalar> basis)
      : basis_(std::move(basis)) {
    require(z.grid() == basis_.grid(), "ProgressiveProjection: grids differ");
    auto [centered, mean] = center_ensemble(z);
    xi_ = project_ensemble(centered, basis_);
    approx_ = RowMatrix<Scalar>::Zero(z.paths(), z.grid().size());
    approx_.rowwise() += mean.values().transpose();
    if (basis_.inner_product() == InnerProduct::cameron_martin)
      approx_.colwise() += centered.values().col(0);
  }

  /// Advances to the first `count` functions (count >= current).
  const RowMatrix<Scalar>& advance(Index count) {
    require(count >= used_ && count <= basis_.size(),
            "ProgressiveProjection: K must be nondecreasing and within the basis");
    if (count > used_)
      approx_.noalias() += xi_.middleCols(used_, count - used_) *
                           basis_.functions().middleRows(used_, count - used_);
    used_ = count;
    return approx_;
  }

  const RowMatrix<Scalar>& current() const { return approx_; }

 private:
  Basis<Scalar> basis_;
  Matrix<Scalar> xi_;
  RowMatrix<Scalar> approx_;
  Index used_ = 0;
};

/// Per-path errors e_j = ||y_j - a_j||^2 (trapezoid).
template <typename Scalar, typename A, typename B>
Vector<Scalar> path_errors(const TimeGrid<Scalar>& grid, const Eigen::MatrixBase<A>& y,
                           const Eigen::MatrixBase<B>& a) {
  const Vector<Scalar> w = grid.trapezoid_weights();
  return (y - a).array().square().matrix() * w;
}

/// sum_j ||a_j - abar||^2 / sum_j ||y_j - ybar||^2.
template <typename Scalar, typename A, typename B>
Scalar variance_ratio(const TimeGrid<Scalar>& grid, const Eigen::MatrixBase<A>& y,
                      const Eigen::MatrixBase<B>& a) {
  const Vector<Scalar> w = grid.trapezoid_weights();
  auto spread = [&](const auto& m) {
    const RowVector<Scalar> mean = m.colwise().mean();
    return ((m.rowwise() - mean).array().square().matrix() * w).sum();
  };
  const Scalar total = spread(y);
  if (!(total > Scalar(0))) throw DegenerateInput("variance_ratio: zero total variance");
  return spread(a) / total;
}

template <typename Scalar>
std::pair<Scalar, Scalar> mean_and_se(const Vector<Scalar>& e) {
  const Scalar n = Scalar(e.size());
  const Scalar mean = e.mean();
  const Scalar var = e.size() > 1 ? (e.array() - mean).square().sum() / (n - Scalar(1)) : Scalar(0);
  return {mean, std::sqrt(var / n)};
}

template <typename Scalar = double>
struct RoutePoint {
  Index K;
  Scalar eps_path, se_path;              // E||f(X) - f(P X)||^2
  Scalar eps_functional, se_functional;  // E||f(X) - P f(X)||^2
  Scalar se_difference;                  // paired SE of eps_path - eps_functional
  Scalar ve_path, ve_functional;
};

/// Both projection routes for Y = f(X) at every K in `counts` (ascending).
template <typename Scalar>
std::vector<RoutePoint<Scalar>> route_errors(FunctionalKind functional,
                                             const PathEnsemble<Scalar>& x,
                                             const Basis<Scalar>& path_basis,
                                             const Basis<Scalar>& functional_basis,
                                             const std::vector<Index>& counts) {
  require(!counts.empty() && std::is_sorted(counts.begin(), counts.end()),
          "route_errors: K list must be nonempty and ascending");
  const auto& grid = x.grid();
  const auto y = apply_functional(functional, x);
  ProgressiveProjection<Scalar> px(x, path_basis), py(y, functional_basis);
  std::vector<RoutePoint<Scalar>> out;
  for (Index K : counts) {
    const auto fx = apply_functional(
        functional, PathEnsemble<Scalar>(grid, px.advance(K)));
    const auto& ay = py.advance(K);
    const Vector<Scalar> e_path = path_errors(grid, y.values(), fx.values());
    const Vector<Scalar> e_fun = path_errors(grid, y.values(), ay);
    const auto [m_path, s_path] = mean_and_se(e_path);
    const auto [m_fun, s_fun] = mean_and_se(e_fun);
    const Vector<Scalar> diff = e_path - e_fun;
    out.push_back({K, m_path, s_path, m_fun, s_fun, mean_and_se(diff).second,
                   variance_ratio(grid, y.values(), fx.values()),
                   variance_ratio(grid, y.values(), ay)});
  }
  return out;
}

/// Empirical KL basis of an ensemble with `count` functions.
template <typename Scalar>
Basis<Scalar> empirical_kl_basis(const PathEnsemble<Scalar>& z, Index count) {
  return solve_eigen(build_kernel_matrix(KernelSpec<Scalar>::empirical(z), z.grid()), count)
      .functions;
}

/// Least-squares slope of log eps against log K.
template <typename Scalar>
Scalar loglog_slope(const std::vector<Index>& counts, const std::vector<Scalar>& eps) {
  require(counts.size() == eps.size() && counts.size() >= 2, "loglog_slope: need two points");
  Scalar sx = 0, sy = 0, sxx = 0, sxy = 0;
  const Scalar n = Scalar(counts.size());
  for (size_t i = 0; i < counts.size(); ++i) {
    require(eps[i] > Scalar(0), "loglog_slope: errors must be positive");
    const Scalar lx = std::log(Scalar(counts[i])), ly = std::log(eps[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const Scalar den = n * sxx - sx * sx;
  require(den > Scalar(0), "loglog_slope: need two distinct K");
  return (n * sxy - sx * sy) / den;
}

}  // namespace klmc

#endif  // KLMC_CONVERGENCE_HPP_
