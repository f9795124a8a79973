#ifndef KLMC_SIMULATE_HPP_
#define KLMC_SIMULATE_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>

#include "klmc/grid.hpp"

namespace klmc {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// SplitMix64 output sequence from a single 64-bit state; a
/// UniformRandomBitGenerator whose construction costs one word.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type(0); }

  result_type operator()() {
    const std::uint64_t out = detail::splitmix64(state_);
    state_ += 0x9e3779b97f4a7c15ULL;
    return out;
  }

 private:
  std::uint64_t state_;
};

/// Engine for path j of a run seeded with `seed`; `tag` separates independent
/// uses of the same path index. Path j always uses
/// the same substream, so ensembles can be generated in chunks (`first_path`)
/// or grown without changing earlier rows.
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t j, std::uint64_t tag = 0) {
  return SplitMix64(detail::splitmix64(detail::splitmix64(seed ^ (tag << 56)) + j));
}

template <typename Scalar = double>
PathEnsemble<Scalar> simulate_brownian(const TimeGrid<Scalar>& grid, Index paths,
                                       std::uint64_t seed, Index first_path = 0) {
  require(paths >= 1, "simulate_brownian: J must be >= 1");
  const Index n_steps = grid.intervals();
  const Scalar sd = std::sqrt(grid.step());
  RowMatrix<Scalar> x(paths, grid.size());
  for (Index j = 0; j < paths; ++j) {
    auto eng = substream(seed, static_cast<std::uint64_t>(first_path + j));
    std::normal_distribution<Scalar> normal;
    x(j, 0) = Scalar(0);
    for (Index n = 0; n < n_steps; ++n) x(j, n + 1) = x(j, n) + sd * normal(eng);
  }
  return PathEnsemble<Scalar>(grid, std::move(x), seed, "brownian");
}

/// Zero-rate Black-Scholes paths using the exact log-normal step.
template <typename Scalar = double>
PathEnsemble<Scalar> simulate_black_scholes(const TimeGrid<Scalar>& grid, Scalar spot,
                                            Scalar sigma, Index paths, std::uint64_t seed,
                                            Index first_path = 0) {
  require(spot > Scalar(0), "simulate_black_scholes: x0 must be positive");
  require(sigma >= Scalar(0), "simulate_black_scholes: sigma must be nonnegative");
  require(paths >= 1, "simulate_black_scholes: J must be >= 1");
  const Index n_steps = grid.intervals();
  const Scalar dt = grid.step();
  const Scalar vol = sigma * std::sqrt(dt);
  const Scalar drift = -Scalar(0.5) * sigma * sigma * dt;
  RowMatrix<Scalar> x(paths, grid.size());
  for (Index j = 0; j < paths; ++j) {
    auto eng = substream(seed, static_cast<std::uint64_t>(first_path + j));
    std::normal_distribution<Scalar> normal;
    x(j, 0) = spot;
    for (Index n = 0; n < n_steps; ++n) x(j, n + 1) = x(j, n) * std::exp(vol * normal(eng) + drift);
  }
  return PathEnsemble<Scalar>(grid, std::move(x), seed, "bs");
}

/// Brownian paths together with their continuously monitored running
/// maximum at the nodes. Each step's maximum is drawn from the exact
/// law of the Brownian bridge maximum given the step endpoints.
template <typename Scalar = double>
std::pair<PathEnsemble<Scalar>, PathEnsemble<Scalar>> simulate_brownian_with_max(
    const TimeGrid<Scalar>& grid, Index paths, std::uint64_t seed) {
  require(paths >= 1, "simulate_brownian_with_max: J must be >= 1");
  const Index n_steps = grid.intervals();
  const Scalar dt = grid.step();
  const Scalar sd = std::sqrt(dt);
  RowMatrix<Scalar> x(paths, grid.size());
  RowMatrix<Scalar> m(paths, grid.size());
  for (Index j = 0; j < paths; ++j) {
    auto eng = substream(seed, static_cast<std::uint64_t>(j));
    auto bridge = substream(seed, static_cast<std::uint64_t>(j), 1);
    std::normal_distribution<Scalar> normal;
    std::uniform_real_distribution<Scalar> uniform;
    x(j, 0) = Scalar(0);
    m(j, 0) = Scalar(0);
    for (Index n = 0; n < n_steps; ++n) {
      const Scalar a = x(j, n);
      const Scalar b = a + sd * normal(eng);
      const Scalar u = Scalar(1) - uniform(bridge);  // (0, 1]
      const Scalar step_max =
          Scalar(0.5) * (a + b + std::sqrt((b - a) * (b - a) - Scalar(2) * dt * std::log(u)));
      x(j, n + 1) = b;
      m(j, n + 1) = std::max(m(j, n), step_max);
    }
  }
  return {PathEnsemble<Scalar>(grid, std::move(x), seed, "brownian"),
          PathEnsemble<Scalar>(grid, std::move(m), seed, "brownian/running_max_continuous")};
}

}  // namespace klmc

#endif  // KLMC_SIMULATE_HPP_
