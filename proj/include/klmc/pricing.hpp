#ifndef KLMC_PRICING_HPP_
#define KLMC_PRICING_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "klmc/functional.hpp"
#include "klmc/kernel.hpp"
#include "klmc/simulate.hpp"

namespace klmc {

// ---------------------------------------------------------------------------
// Quantiles

/// Sample quantile function, Hyndman-Fan type 7.
template <typename Scalar = double>
class QuantileTable {
 public:
  explicit QuantileTable(std::vector<Scalar> samples) : sorted_(std::move(samples)) {
    require(sorted_.size() >= 2, "QuantileTable: need at least two samples");
    require(std::all_of(sorted_.begin(), sorted_.end(),
                        [](Scalar v) { return std::isfinite(static_cast<double>(v)); }),
            "QuantileTable: samples must be finite");
    std::sort(sorted_.begin(), sorted_.end());
  }

  /// h = (n-1)p + 1, Q(p) = x_(floor h) + (h - floor h)(x_(floor h + 1) - x_(floor h)),
  /// with 1-based order statistics.
  Scalar operator()(Scalar p) const {
    const auto n = static_cast<Index>(sorted_.size());
    const Scalar h = Scalar(n - 1) * p + Scalar(1);
    const Scalar lo = std::floor(h);
    const auto i = static_cast<Index>(lo);
    if (i >= n) return sorted_.back();
    if (i < 1) return sorted_.front();
    return sorted_[size_t(i - 1)] + (h - lo) * (sorted_[size_t(i)] - sorted_[size_t(i - 1)]);
  }

  const std::vector<Scalar>& sorted() const { return sorted_; }
  Index size() const { return static_cast<Index>(sorted_.size()); }

 private:
  std::vector<Scalar> sorted_;
};

template <typename Scalar>
QuantileTable<Scalar> hf7_quantile_table(std::vector<Scalar> samples) {
  return QuantileTable<Scalar>(std::move(samples));
}

template <typename Scalar>
Scalar inverse_transform_sample(const QuantileTable<Scalar>& table, Scalar u) {
  require(u >= Scalar(0) && u <= Scalar(1), "inverse_transform_sample: u must lie in [0, 1]");
  return table(u);
}

// ---------------------------------------------------------------------------
// Payoffs and surfaces

enum class PayoffKind { call, uo_digital };

inline std::string to_string(PayoffKind k) { return k == PayoffKind::call ? "call" : "uo_digital"; }

inline PayoffKind parse_payoff(const std::string& name) {
  if (name == "call") return PayoffKind::call;
  if (name == "uo_digital") return PayoffKind::uo_digital;
  throw InvalidArgument("unknown payoff '" + name + "'");
}

/// h_m(y): call (y - m x0)^+, up-and-out digital 1{y <= m x0}.
template <typename Scalar = double>
struct Payoff {
  PayoffKind kind;
  Scalar spot;

  Scalar operator()(Scalar moneyness, Scalar y) const {
    const Scalar level = moneyness * spot;
    if (kind == PayoffKind::call) return std::max(y - level, Scalar(0));
    return y <= level ? Scalar(1) : Scalar(0);
  }
};

template <typename Scalar = double>
struct PriceSurface {
  std::vector<Scalar> moneyness;
  std::vector<Scalar> maturities;
  Matrix<Scalar> prices;      // |M| x |T|
  Matrix<Scalar> std_errors;  // same shape
  Index paths = 0;
};

template <typename Scalar>
Scalar mse_surface(const PriceSurface<Scalar>& a, const PriceSurface<Scalar>& b) {
  require(a.moneyness == b.moneyness && a.maturities == b.maturities &&
              a.prices.rows() == b.prices.rows() && a.prices.cols() == b.prices.cols(),
          "mse_surface: surfaces are not on the same (m, tau) grid");
  return (a.prices - b.prices).squaredNorm() / Scalar(a.prices.size());
}

namespace detail {

/// Accumulates payoff sums for a block of transformed values (rows = paths,
/// cols = maturities).
template <typename Scalar>
class SurfaceAccumulator {
 public:
  SurfaceAccumulator(const Payoff<Scalar>& payoff, std::vector<Scalar> moneyness,
                     std::vector<Scalar> maturities)
      : payoff_(payoff), moneyness_(std::move(moneyness)), maturities_(std::move(maturities)) {
    const auto M = static_cast<Index>(moneyness_.size());
    const auto T = static_cast<Index>(maturities_.size());
    sum_ = Matrix<Scalar>::Zero(M, T);
    sum_sq_ = Matrix<Scalar>::Zero(M, T);
  }

  template <typename Derived>
  void add(const Eigen::MatrixBase<Derived>& y) {
    for (Index c = 0; c < y.cols(); ++c) {
      const auto col = y.col(c).array();
      for (Index m = 0; m < sum_.rows(); ++m) {
        const Scalar level = moneyness_[size_t(m)] * payoff_.spot;
        if (payoff_.kind == PayoffKind::call) {
          const Eigen::Array<Scalar, Eigen::Dynamic, 1> h = (col - level).cwiseMax(Scalar(0));
          sum_(m, c) += h.sum();
          sum_sq_(m, c) += h.square().sum();
        } else {
          const Scalar alive = Scalar((col <= level).count());
          sum_(m, c) += alive;
          sum_sq_(m, c) += alive;
        }
      }
    }
    count_ += y.rows();
  }

  PriceSurface<Scalar> finish() const {
    PriceSurface<Scalar> out{moneyness_, maturities_, sum_ / Scalar(count_), {}, count_};
    const Scalar n = Scalar(count_);
    Matrix<Scalar> var = (sum_sq_ - sum_.cwiseAbs2() / n) / std::max(n - Scalar(1), Scalar(1));
    out.std_errors = (var.cwiseMax(Scalar(0)) / n).cwiseSqrt();
    return out;
  }

 private:
  Payoff<Scalar> payoff_;
  std::vector<Scalar> moneyness_;
  std::vector<Scalar> maturities_;
  Matrix<Scalar> sum_, sum_sq_;
  Index count_ = 0;
};

template <typename Scalar>
std::vector<Index> maturity_columns(const TimeGrid<Scalar>& grid,
                                    const std::vector<Scalar>& maturities, const char* who) {
  require(!maturities.empty(), std::string(who) + ": empty maturity set");
  std::vector<Index> cols;
  for (Scalar tau : maturities) {
    const Index n = grid.find_node(tau);
    if (n < 0)
      throw InvalidArgument(std::string(who) + ": maturity " + std::to_string(double(tau)) +
                            " is not a grid node");
    cols.push_back(n);
  }
  return cols;
}

inline constexpr Index kChunkPaths = 4096;

}  // namespace detail

// ---------------------------------------------------------------------------
// Underlying models

/// black_scholes: x_t = x0 E_t(sigma W), zero rate.
/// bachelier:     x_t = x0 + sigma W_t (Brownian; closed-form kernels exist).
enum class Model { black_scholes, bachelier };

inline std::string to_string(Model m) { return m == Model::black_scholes ? "black_scholes" : "bachelier"; }

inline Model parse_model(const std::string& name) {
  if (name == "black_scholes" || name == "bs") return Model::black_scholes;
  if (name == "bachelier" || name == "brownian") return Model::bachelier;
  throw InvalidArgument("unknown model '" + name + "'");
}

template <typename Scalar = double>
struct ModelParams {
  Model model = Model::black_scholes;
  Scalar spot = 100;
  Scalar sigma = Scalar(0.2);
  Scalar horizon = 1;
};

template <typename Scalar>
PathEnsemble<Scalar> simulate_model(const ModelParams<Scalar>& params, const TimeGrid<Scalar>& grid,
                                    Index paths, std::uint64_t seed, Index first_path = 0) {
  if (params.model == Model::black_scholes)
    return simulate_black_scholes(grid, params.spot, params.sigma, paths, seed, first_path);
  require(params.sigma >= Scalar(0), "simulate_model: sigma must be nonnegative");
  auto w = simulate_brownian(grid, paths, seed, first_path);
  RowMatrix<Scalar> x = (params.sigma * w.values().array() + params.spot).matrix();
  return PathEnsemble<Scalar>(grid, std::move(x), seed, "bachelier");
}

/// Closed-form kernel registered for (model, functional), if any. Only the
/// Brownian model with the centered linear functionals qualifies; the
/// running maximum is left to the sample because nodes only see the
/// discretely monitored maximum.
template <typename Scalar>
std::optional<KernelMatrix<Scalar>> registered_kernel(const ModelParams<Scalar>& params,
                                                      FunctionalKind functional,
                                                      const TimeGrid<Scalar>& grid) {
  if (params.model != Model::bachelier) return std::nullopt;
  KernelKind kind;
  switch (functional) {
    case FunctionalKind::identity: kind = KernelKind::brownian; break;
    case FunctionalKind::time_integral: kind = KernelKind::time_integral; break;
    case FunctionalKind::time_average: kind = KernelKind::time_average; break;
    default: return std::nullopt;
  }
  auto km = build_kernel_matrix(KernelSpec<Scalar>::analytic(kind), grid);
  km.entries *= params.sigma * params.sigma;
  Vector<Scalar> mean(grid.size());
  for (Index n = 0; n < grid.size(); ++n)
    mean[n] = functional == FunctionalKind::time_integral ? params.spot * grid.node(n) : params.spot;
  km.mean = DiscretePath<Scalar>(grid, std::move(mean));
  return km;
}

// ---------------------------------------------------------------------------
// KLMC

/// Offline artifact: eigenpairs and per-coefficient quantile tables of the
/// centered transformed path.
template <typename Scalar = double>
struct KlmcModel {
  FunctionalKind functional;
  ModelParams<Scalar> params;
  Index offline_paths;  // J_off
  std::uint64_t seed;
  bool analytic_kernel = false;
  DiscretePath<Scalar> mean;
  Vector<Scalar> eigenvalues;
  Basis<Scalar> eigenfunctions;
  std::vector<QuantileTable<Scalar>> quantiles;

  const TimeGrid<Scalar>& grid() const { return eigenfunctions.grid(); }
  Index size() const { return eigenvalues.size(); }
};

struct OfflineOptions {
  bool prefer_analytic = true;  // use a registered closed-form kernel when one exists
};

/// Offline phase, streamed over path chunks: simulate, transform, accumulate
/// the sample covariance, solve the eigenproblem, then regenerate the same
/// paths to collect the coefficients xi_k = Sum'' (y - mean) F_k dt.
template <typename Scalar>
KlmcModel<Scalar> klmc_offline(FunctionalKind functional, const ModelParams<Scalar>& params,
                               Index count, Index offline_steps, Index offline_paths,
                               std::uint64_t seed, OfflineOptions options = {}) {
  const TimeGrid<Scalar> grid(params.horizon, offline_steps);
  require(count >= 1 && count <= grid.size(), "klmc_offline: need 1 <= K <= N_off + 1");
  require(offline_paths >= 2, "klmc_offline: need J_off >= 2");
  const Index size = grid.size();

  auto transformed = [&](Index first, Index rows) {
    return apply_functional(functional, simulate_model(params, grid, rows, seed, first));
  };

  std::optional<KernelMatrix<Scalar>> kernel;
  if (options.prefer_analytic) kernel = registered_kernel(params, functional, grid);
  const bool analytic = kernel.has_value();

  if (!analytic) {
    // Shifted sums keep the covariance free of cancellation for large means.
    Vector<Scalar> shift, sum = Vector<Scalar>::Zero(size);
    Matrix<Scalar> sum_sq = Matrix<Scalar>::Zero(size, size);
    for (Index first = 0; first < offline_paths; first += detail::kChunkPaths) {
      const Index rows = std::min(detail::kChunkPaths, offline_paths - first);
      const auto y = transformed(first, rows);
      if (first == 0) shift = y.values().row(0).transpose();
      const RowMatrix<Scalar> d = y.values().rowwise() - shift.transpose();
      sum += d.colwise().sum().transpose();
      sum_sq.template selfadjointView<Eigen::Lower>().rankUpdate(d.transpose());
    }
    const Scalar J = Scalar(offline_paths);
    const Vector<Scalar> m = sum / J;
    Matrix<Scalar> cov = sum_sq.template selfadjointView<Eigen::Lower>();
    cov = cov / J - m * m.transpose();
    kernel = KernelMatrix<Scalar>{grid, std::move(cov), DiscretePath<Scalar>(grid, m + shift)};
  }

  const EigenPairs<Scalar> pairs = [&] {
    try {
      return solve_eigen(*kernel, count);
    } catch (const NotPositiveSemidefinite& e) {
      throw NotPositiveSemidefinite(std::string(e.what()) + " (raise J_off)");
    }
  }();

  const Vector<Scalar> w = grid.trapezoid_weights();
  const Matrix<Scalar> proj = w.asDiagonal() * pairs.functions.functions().transpose();
  Matrix<Scalar> xi(offline_paths, count);
  for (Index first = 0; first < offline_paths; first += detail::kChunkPaths) {
    const Index rows = std::min(detail::kChunkPaths, offline_paths - first);
    const auto y = transformed(first, rows);
    const RowMatrix<Scalar> centered = y.values().rowwise() - kernel->mean.values().transpose();
    xi.middleRows(first, rows) = centered * proj;
  }

  std::vector<QuantileTable<Scalar>> tables;
  tables.reserve(size_t(count));
  for (Index k = 0; k < count; ++k)
    tables.emplace_back(std::vector<Scalar>(xi.col(k).data(), xi.col(k).data() + offline_paths));

  return KlmcModel<Scalar>{functional,        params, offline_paths, seed, analytic,
                           kernel->mean,      pairs.eigenvalues,     pairs.functions,
                           std::move(tables)};
}

/// Online coefficients xi^j_k = Q_k(u^j_k) for paths first..first+rows-1.
template <typename Scalar>
Matrix<Scalar> klmc_sample_coefficients(const KlmcModel<Scalar>& model, Index first, Index rows,
                                        std::uint64_t seed) {
  const Index K = model.size();
  Matrix<Scalar> xi(rows, K);
  for (Index j = 0; j < rows; ++j) {
    auto eng = substream(seed, static_cast<std::uint64_t>(first + j), 2);
    std::uniform_real_distribution<Scalar> uniform;
    for (Index k = 0; k < K; ++k) xi(j, k) = uniform(eng);
  }
  // One table at a time keeps the lookups cache-resident.
  for (Index k = 0; k < K; ++k) {
    const auto& table = model.quantiles[size_t(k)];
    for (Index j = 0; j < rows; ++j) xi(j, k) = table(xi(j, k));
  }
  return xi;
}

/// Online phase: y_tau = mean(tau) + sum_k xi_k F_k(tau) with independent
/// uniforms per coefficient, priced at every (m, tau).
template <typename Scalar>
PriceSurface<Scalar> klmc_online(const KlmcModel<Scalar>& model, PayoffKind payoff,
                                 const std::vector<Scalar>& moneyness,
                                 const std::vector<Scalar>& maturities, Index paths,
                                 std::uint64_t seed) {
  require(paths >= 2, "klmc_online: need J >= 2");
  require(!moneyness.empty(), "klmc_online: empty moneyness set");
  const auto cols = detail::maturity_columns(model.grid(), maturities, "klmc_online");
  const Index T = static_cast<Index>(cols.size());
  Matrix<Scalar> F_tau(model.size(), T);
  RowVector<Scalar> mean_tau(T);
  for (Index c = 0; c < T; ++c) {
    F_tau.col(c) = model.eigenfunctions.functions().col(cols[size_t(c)]);
    mean_tau[c] = model.mean[cols[size_t(c)]];
  }
  detail::SurfaceAccumulator<Scalar> acc({payoff, model.params.spot}, moneyness, maturities);
  for (Index first = 0; first < paths; first += detail::kChunkPaths) {
    const Index rows = std::min(detail::kChunkPaths, paths - first);
    Matrix<Scalar> y = klmc_sample_coefficients(model, first, rows, seed) * F_tau;
    y.rowwise() += mean_tau;
    acc.add(y);
  }
  return acc.finish();
}

/// Standard Monte Carlo: full paths on an N-step grid, functional applied
/// along the path, payoff read at each maturity.
template <typename Scalar>
PriceSurface<Scalar> mc_benchmark(const ModelParams<Scalar>& params, FunctionalKind functional,
                                  PayoffKind payoff, const std::vector<Scalar>& moneyness,
                                  const std::vector<Scalar>& maturities, Index steps, Index paths,
                                  std::uint64_t seed) {
  require(paths >= 2, "mc_benchmark: need J >= 2");
  require(!moneyness.empty(), "mc_benchmark: empty moneyness set");
  const TimeGrid<Scalar> grid(params.horizon, steps);
  const auto cols = detail::maturity_columns(grid, maturities, "mc_benchmark");
  detail::SurfaceAccumulator<Scalar> acc({payoff, params.spot}, moneyness, maturities);
  Matrix<Scalar> y_tau;
  for (Index first = 0; first < paths; first += detail::kChunkPaths) {
    const Index rows = std::min(detail::kChunkPaths, paths - first);
    const auto y = apply_functional(functional, simulate_model(params, grid, rows, seed, first));
    y_tau.resize(rows, static_cast<Index>(cols.size()));
    for (size_t c = 0; c < cols.size(); ++c) y_tau.col(Index(c)) = y.values().col(cols[c]);
    acc.add(y_tau);
  }
  return acc.finish();
}

}  // namespace klmc

#endif  // KLMC_PRICING_HPP_
