#ifndef KLMC_FUNCTIONAL_HPP_
#define KLMC_FUNCTIONAL_HPP_

#include <algorithm>
#include <utility>

#include "klmc/grid.hpp"

namespace klmc {

/// Causal transform y_{t_n} = f(X_{t_n}) applied path by path.
///
/// time_integral is the cumulative trapezoid; time_average divides it by
/// t_n and takes y_{t_0} = x_{t_0}, the continuous-time limit.
template <typename Scalar>
PathEnsemble<Scalar> apply_functional(FunctionalKind kind, const PathEnsemble<Scalar>& ensemble) {
  const auto& x = ensemble.values();
  const auto& grid = ensemble.grid();
  const Index cols = grid.size();
  const Scalar half_dt = Scalar(0.5) * grid.step();
  RowMatrix<Scalar> y(x.rows(), cols);

  for (Index j = 0; j < x.rows(); ++j) {
    switch (kind) {
      case FunctionalKind::identity:
        y.row(j) = x.row(j);
        break;
      case FunctionalKind::time_integral:
      case FunctionalKind::time_average: {
        Scalar acc = Scalar(0);
        y(j, 0) = kind == FunctionalKind::time_integral ? Scalar(0) : x(j, 0);
        for (Index n = 1; n < cols; ++n) {
          acc += half_dt * (x(j, n - 1) + x(j, n));
          y(j, n) = kind == FunctionalKind::time_integral ? acc : acc / grid.node(n);
        }
        break;
      }
      case FunctionalKind::running_max: {
        Scalar hi = x(j, 0);
        for (Index n = 0; n < cols; ++n) y(j, n) = hi = std::max(hi, x(j, n));
        break;
      }
      case FunctionalKind::running_min: {
        Scalar lo = x(j, 0);
        for (Index n = 0; n < cols; ++n) y(j, n) = lo = std::min(lo, x(j, n));
        break;
      }
      case FunctionalKind::range: {
        Scalar hi = x(j, 0), lo = x(j, 0);
        for (Index n = 0; n < cols; ++n) {
          hi = std::max(hi, x(j, n));
          lo = std::min(lo, x(j, n));
          y(j, n) = hi - lo;
        }
        break;
      }
    }
  }
  std::string label = ensemble.label().empty() ? to_string(kind)
                                               : ensemble.label() + "/" + to_string(kind);
  return PathEnsemble<Scalar>(grid, std::move(y), ensemble.seed(), std::move(label));
}

/// Subtracts the column (per-node) sample mean; returns the centered
/// ensemble and the mean function.
template <typename Scalar>
std::pair<PathEnsemble<Scalar>, DiscretePath<Scalar>> center_ensemble(
    const PathEnsemble<Scalar>& ensemble) {
  require(ensemble.paths() >= 2, "center_ensemble: need J >= 2");
  const RowVector<Scalar> mean = ensemble.values().colwise().mean();
  RowMatrix<Scalar> centered = ensemble.values().rowwise() - mean;
  return {PathEnsemble<Scalar>(ensemble.grid(), std::move(centered), ensemble.seed(),
                               ensemble.label()),
          DiscretePath<Scalar>(ensemble.grid(), mean.transpose())};
}

}  // namespace klmc

#endif  // KLMC_FUNCTIONAL_HPP_
