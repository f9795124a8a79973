#ifndef KLMC_KERNEL_HPP_
#define KLMC_KERNEL_HPP_

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <utility>

#include "klmc/bases.hpp"
#include "klmc/functional.hpp"

namespace klmc {

enum class KernelKind { brownian, brownian_bridge, time_integral, time_average, running_max, empirical };

inline std::string to_string(KernelKind k) {
  switch (k) {
    case KernelKind::brownian: return "brownian";
    case KernelKind::brownian_bridge: return "brownian_bridge";
    case KernelKind::time_integral: return "time_integral";
    case KernelKind::time_average: return "time_average";
    case KernelKind::running_max: return "running_max";
    case KernelKind::empirical: return "empirical";
  }
  return "?";
}

template <typename Scalar = double>
struct KernelSpec {
  KernelKind kind;
  std::optional<PathEnsemble<Scalar>> sample;  // empirical only

  static KernelSpec analytic(KernelKind kind) {
    require(kind != KernelKind::empirical, "KernelSpec: empirical kernel needs a sample");
    return {kind, std::nullopt};
  }
  static KernelSpec empirical(PathEnsemble<Scalar> sample) {
    require(sample.paths() >= 2, "KernelSpec: empirical kernel needs J >= 2");
    return {KernelKind::empirical, std::move(sample)};
  }
};

/// Closed-form covariance of the Brownian functionals on [0, T]. Evaluated with
/// (s, t) sorted so the result is symmetric by construction.
template <typename Scalar>
Scalar analytic_kernel(KernelKind kind, Scalar s, Scalar t, Scalar horizon = Scalar(1)) {
  if (s > t) std::swap(s, t);
  switch (kind) {
    case KernelKind::brownian:
      return s;
    case KernelKind::brownian_bridge:
      return s - s * t / horizon;
    case KernelKind::time_integral:
      return s * s * t / Scalar(2) - s * s * s / Scalar(6);
    case KernelKind::time_average:
      if (t <= Scalar(0)) return Scalar(0);
      return s / Scalar(2) - s * s / (Scalar(6) * t);
    case KernelKind::running_max: {
      if (s <= Scalar(0)) return Scalar(0);
      const Scalar pi = std::numbers::pi_v<Scalar>;
      const Scalar ratio = std::min(Scalar(1), std::sqrt(s / t));
      return s / Scalar(2) +
             (std::sqrt(s * (t - s)) - Scalar(2) * std::sqrt(s * t) + t * std::asin(ratio)) / pi;
    }
    case KernelKind::empirical:
      break;
  }
  throw InvalidArgument("analytic_kernel: no closed form for kind " + to_string(kind));
}

/// Mean function paired with an analytic kernel (zero except for the running max).
template <typename Scalar>
Scalar analytic_mean(KernelKind kind, Scalar t) {
  if (kind == KernelKind::running_max)
    return std::sqrt(Scalar(2) * t / std::numbers::pi_v<Scalar>);
  return Scalar(0);
}

template <typename Scalar = double>
struct KernelMatrix {
  TimeGrid<Scalar> grid;
  Matrix<Scalar> entries;
  DiscretePath<Scalar> mean;
};

/// Tabulates an analytic kernel, or the biased (1/J) sample covariance of an
/// empirical one.
template <typename Scalar>
KernelMatrix<Scalar> build_kernel_matrix(const KernelSpec<Scalar>& spec,
                                         const TimeGrid<Scalar>& grid) {
  if (spec.kind == KernelKind::empirical) {
    const auto& sample = *spec.sample;
    require(sample.grid() == grid, "build_kernel_matrix: sample grid differs");
    auto [centered, mean] = center_ensemble(sample);
    const Index size = grid.size();
    Matrix<Scalar> K = Matrix<Scalar>::Zero(size, size);
    K.template selfadjointView<Eigen::Lower>().rankUpdate(centered.values().transpose(),
                                                          Scalar(1) / Scalar(sample.paths()));
    K.template triangularView<Eigen::StrictlyUpper>() = K.transpose();
    return {grid, std::move(K), std::move(mean)};
  }
  const Index size = grid.size();
  Matrix<Scalar> K(size, size);
  Vector<Scalar> mu(size);
  for (Index n = 0; n < size; ++n) {
    mu[n] = analytic_mean(spec.kind, grid.node(n));
    for (Index m = 0; m <= n; ++m)
      K(n, m) = K(m, n) = analytic_kernel(spec.kind, grid.node(n), grid.node(m), grid.horizon());
  }
  return {grid, std::move(K), DiscretePath<Scalar>(grid, std::move(mu))};
}

/// Retained eigenpairs plus the full discrete spectrum.
template <typename Scalar = double>
struct EigenPairs {
  Vector<Scalar> eigenvalues;  // K retained, nonincreasing
  Basis<Scalar> functions;     // family empirical_kl, quadrature-normalized
  Vector<Scalar> spectrum;     // all N+1 eigenvalues, nonincreasing, clipped at 0

  Index size() const { return eigenvalues.size(); }
};

inline constexpr double kNegativeEigenError = 1e-6;

/// Trapezoidal discretization of the Fredholm problem
///   Sum''_n kappa(t_n, t_m) F(t_n) dt = lambda F(t_m),
/// solved through the symmetric form W^{1/2} kappa W^{1/2}.
///
/// Eigenvalues in [-1e-6 lambda_1, 0) are sampling noise and clipped to 0;
/// anything more negative throws NotPositiveSemidefinite.
template <typename Scalar>
EigenPairs<Scalar> solve_eigen(const KernelMatrix<Scalar>& kernel, Index count) {
  const auto& grid = kernel.grid;
  const Index size = grid.size();
  require(count >= 1 && count <= size, "solve_eigen: need 1 <= K <= N+1");
  require(kernel.entries.rows() == size && kernel.entries.cols() == size,
          "solve_eigen: kernel shape does not match grid");

  const Vector<Scalar> root_w = grid.trapezoid_weights().cwiseSqrt();
  const Matrix<Scalar> B = root_w.asDiagonal() * kernel.entries * root_w.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(B);
  if (solver.info() != Eigen::Success) throw std::runtime_error("solve_eigen: eigensolver failed");

  Vector<Scalar> spectrum = solver.eigenvalues().reverse();
  const Scalar scale = std::max(std::abs(spectrum[0]), std::abs(spectrum[size - 1]));
  if (spectrum[size - 1] < -Scalar(kNegativeEigenError) * scale)
    throw NotPositiveSemidefinite(
        "solve_eigen: kernel has a significantly negative eigenvalue (" +
        std::to_string(static_cast<double>(spectrum[size - 1])) +
        "); an empirical kernel needs more paths");
  spectrum = spectrum.cwiseMax(Scalar(0));

  const Vector<Scalar> w = grid.trapezoid_weights();
  RowMatrix<Scalar> F(count, size);
  for (Index k = 0; k < count; ++k) {
    Vector<Scalar> f = solver.eigenvectors().col(size - 1 - k).cwiseQuotient(root_w);
    Scalar integral = w.dot(f);
    Scalar sign = Scalar(1);
    if (std::abs(integral) > Scalar(1e-10)) {
      sign = integral > 0 ? Scalar(1) : Scalar(-1);
    } else {
      const Scalar cutoff = Scalar(1e-12) * f.cwiseAbs().maxCoeff();
      for (Index n = 0; n < size; ++n)
        if (std::abs(f[n]) > cutoff) {
          sign = f[n] > 0 ? Scalar(1) : Scalar(-1);
          break;
        }
    }
    F.row(k) = sign * f.transpose();
  }
  Vector<Scalar> lambda = spectrum.head(count);
  return {lambda,
          Basis<Scalar>(grid, std::move(F), BasisFamily::empirical_kl, InnerProduct::l2,
                        "k = 1..K by decreasing eigenvalue", lambda),
          std::move(spectrum)};
}

/// max |kappa(t_n, t_m) - sum_{k <= K} lambda_k F_k(t_n) F_k(t_m)|.
template <typename Scalar>
Scalar mercer_residual(const KernelMatrix<Scalar>& kernel, const EigenPairs<Scalar>& pairs,
                       Index upto = -1) {
  if (upto < 0) upto = pairs.size();
  require(upto <= pairs.size(), "mercer_residual: K exceeds retained pairs");
  const auto F = pairs.functions.functions().topRows(upto);
  const Matrix<Scalar> approx =
      F.transpose() * pairs.eigenvalues.head(upto).asDiagonal() * F;
  return (kernel.entries - approx).cwiseAbs().maxCoeff();
}

}  // namespace klmc

#endif  // KLMC_KERNEL_HPP_
