#ifndef KLMC_CORE_HPP_
#define KLMC_CORE_HPP_

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace klmc {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Row-major storage: one row per path or per basis function.
template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Index = Eigen::Index;

// Error taxonomy. Everything derives from a std exception so callers can
// catch broadly; the concrete type names the failure class.

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class UnsupportedOrder : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class DegenerateInput : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class NotPositiveSemidefinite : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RankDeficient : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

}  // namespace klmc

#endif  // KLMC_CORE_HPP_
