#ifndef KLMC_GRID_HPP_
#define KLMC_GRID_HPP_

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include "klmc/core.hpp"

namespace klmc {

/// Uniform partition t_n = n T / N of [0, T].
template <typename Scalar = double>
class TimeGrid {
 public:
  TimeGrid(Scalar horizon, Index intervals) : horizon_(horizon), intervals_(intervals) {
    require(std::isfinite(static_cast<double>(horizon)) && horizon > Scalar(0),
            "TimeGrid: horizon must be positive");
    require(intervals >= 1, "TimeGrid: need at least one subinterval");
  }

  Scalar horizon() const { return horizon_; }
  Index intervals() const { return intervals_; }
  Index size() const { return intervals_ + 1; }
  Scalar step() const { return horizon_ / Scalar(intervals_); }

  // Last node is pinned to T so that t_N == T exactly.
  Scalar node(Index n) const {
    return n == intervals_ ? horizon_ : Scalar(n) * horizon_ / Scalar(intervals_);
  }

  Vector<Scalar> nodes() const {
    Vector<Scalar> t(size());
    for (Index n = 0; n < size(); ++n) t[n] = node(n);
    return t;
  }

  /// Trapezoid weights: dt everywhere, halved at both ends.
  Vector<Scalar> trapezoid_weights() const {
    Vector<Scalar> w = Vector<Scalar>::Constant(size(), step());
    w[0] *= Scalar(0.5);
    w[intervals_] *= Scalar(0.5);
    return w;
  }

  /// Index of the node equal to t, or -1. Tolerates rounding of t = k T / M.
  Index find_node(Scalar t) const {
    const Scalar x = t / step();
    const Scalar r = std::round(x);
    if (r < Scalar(0) || r > Scalar(intervals_)) return -1;
    if (std::abs(x - r) > Scalar(1e-9) * std::max(Scalar(1), r)) return -1;
    return static_cast<Index>(r);
  }

  bool operator==(const TimeGrid& other) const {
    return horizon_ == other.horizon_ && intervals_ == other.intervals_;
  }
  bool operator!=(const TimeGrid& other) const { return !(*this == other); }

 private:
  Scalar horizon_;
  Index intervals_;
};

template <typename Scalar = double>
TimeGrid<Scalar> make_uniform_grid(Scalar horizon, Index intervals) {
  return TimeGrid<Scalar>(horizon, intervals);
}

/// Sum'' of v against the trapezoid weights of the grid.
template <typename Scalar, typename Derived>
Scalar trapezoid(const TimeGrid<Scalar>& grid, const Eigen::MatrixBase<Derived>& v) {
  const Index n = grid.intervals();
  return grid.step() * (v.sum() - Scalar(0.5) * (v[0] + v[n]));
}

/// One sampled trajectory x_{t_0..t_N}.
template <typename Scalar = double>
class DiscretePath {
 public:
  DiscretePath(TimeGrid<Scalar> grid, Vector<Scalar> values)
      : grid_(std::move(grid)), values_(std::move(values)) {
    require(values_.size() == grid_.size(), "DiscretePath: values length must be N+1");
    require(values_.allFinite(), "DiscretePath: values must be finite");
  }

  template <typename F>
  static DiscretePath sample(const TimeGrid<Scalar>& grid, F&& f) {
    Vector<Scalar> v(grid.size());
    for (Index n = 0; n < grid.size(); ++n) v[n] = f(grid.node(n));
    return DiscretePath(grid, std::move(v));
  }

  const TimeGrid<Scalar>& grid() const { return grid_; }
  const Vector<Scalar>& values() const { return values_; }
  Scalar operator[](Index n) const { return values_[n]; }
  Index size() const { return values_.size(); }

 private:
  TimeGrid<Scalar> grid_;
  Vector<Scalar> values_;
};

/// J sampled trajectories, one per row.
template <typename Scalar = double>
class PathEnsemble {
 public:
  PathEnsemble(TimeGrid<Scalar> grid, RowMatrix<Scalar> values, std::uint64_t seed = 0,
               std::string label = {})
      : grid_(std::move(grid)), values_(std::move(values)), seed_(seed), label_(std::move(label)) {
    require(values_.cols() == grid_.size(), "PathEnsemble: columns must equal N+1");
    require(values_.rows() >= 1, "PathEnsemble: need at least one path");
  }

  const TimeGrid<Scalar>& grid() const { return grid_; }
  const RowMatrix<Scalar>& values() const { return values_; }
  Index paths() const { return values_.rows(); }
  std::uint64_t seed() const { return seed_; }
  const std::string& label() const { return label_; }

  DiscretePath<Scalar> path(Index j) const {
    return DiscretePath<Scalar>(grid_, values_.row(j).transpose());
  }

 private:
  TimeGrid<Scalar> grid_;
  RowMatrix<Scalar> values_;
  std::uint64_t seed_;
  std::string label_;
};

enum class FunctionalKind { identity, time_integral, time_average, running_max, running_min, range };

inline std::string to_string(FunctionalKind kind) {
  switch (kind) {
    case FunctionalKind::identity: return "identity";
    case FunctionalKind::time_integral: return "time_integral";
    case FunctionalKind::time_average: return "time_average";
    case FunctionalKind::running_max: return "running_max";
    case FunctionalKind::running_min: return "running_min";
    case FunctionalKind::range: return "range";
  }
  return "?";
}

inline FunctionalKind parse_functional(const std::string& name) {
  for (auto k : {FunctionalKind::identity, FunctionalKind::time_integral,
                 FunctionalKind::time_average, FunctionalKind::running_max,
                 FunctionalKind::running_min, FunctionalKind::range}) {
    if (to_string(k) == name) return k;
  }
  throw InvalidArgument("unknown functional '" + name + "'");
}

}  // namespace klmc

#endif  // KLMC_GRID_HPP_
