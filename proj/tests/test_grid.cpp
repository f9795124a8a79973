#include <doctest.h>

#include <cmath>
#include <numbers>

#include "klmc/functional.hpp"
#include "klmc/simulate.hpp"
#include "support/oracles.hpp"

using namespace klmc;

TEST_CASE("uniform grid nodes and step") {
  const auto g = make_uniform_grid(1.0, 4);
  CHECK(g.size() == 5);
  const double expected[] = {0, 0.25, 0.5, 0.75, 1};
  for (Index n = 0; n < 5; ++n) CHECK(g.node(n) == expected[n]);
  CHECK(make_uniform_grid(1.0, 1).node(1) == 1.0);
  CHECK(make_uniform_grid(2.0, 4).step() == 0.5);
  const auto g3 = make_uniform_grid(1.0, 3);
  CHECK(g3.node(3) == 1.0);
  CHECK(std::abs(g3.step() * 3 - 1.0) <= std::numeric_limits<double>::epsilon());
  CHECK_THROWS_AS(make_uniform_grid(0.0, 4), InvalidArgument);
  CHECK_THROWS_AS(make_uniform_grid(1.0, 0), InvalidArgument);
}

TEST_CASE("trapezoid weights integrate linear functions exactly") {
  const auto g = make_uniform_grid(2.0, 7);
  const auto w = g.trapezoid_weights();
  CHECK(w.sum() == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(w[0] == doctest::Approx(g.step() / 2));
  Vector<double> t = g.nodes();
  CHECK(trapezoid(g, t) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("discrete path validation") {
  const auto g = make_uniform_grid(1.0, 2);
  CHECK_THROWS_AS(DiscretePath<double>(g, Vector<double>::Zero(2)), InvalidArgument);
  Vector<double> bad(3);
  bad << 0, NAN, 1;
  CHECK_THROWS_AS(DiscretePath<double>(g, bad), InvalidArgument);
}

TEST_CASE("brownian ensemble moments") {
  const auto g = make_uniform_grid(1.0, 10);
  const Index J = Index(1) << 16;
  const auto e = simulate_brownian(g, J, 11);
  CHECK((e.values().col(0).array() == 0).all());
  std::vector<double> sq(J), prod(J);
  for (Index j = 0; j < J; ++j) {
    sq[size_t(j)] = e.values()(j, 10) * e.values()(j, 10);
    prod[size_t(j)] = e.values()(j, 3) * e.values()(j, 7);
  }
  const auto var = oracle::mean_se(sq);
  CHECK(std::abs(var.mean - 1.0) < 3 * var.se);
  const auto cov = oracle::mean_se(prod);
  CHECK(std::abs(cov.mean - 0.3) < 3 * cov.se);
  CHECK_THROWS_AS(simulate_brownian(g, 0, 1), InvalidArgument);
}

TEST_CASE("simulation is deterministic and chunkable") {
  const auto g = make_uniform_grid(1.0, 16);
  const auto a = simulate_brownian(g, 40, 99);
  const auto b = simulate_brownian(g, 40, 99);
  CHECK(a.values() == b.values());
  const auto tail = simulate_brownian(g, 15, 99, 25);
  CHECK(tail.values() == a.values().bottomRows(15));
  CHECK(simulate_brownian(g, 40, 100).values() != a.values());
}

TEST_CASE("black-scholes paths") {
  const auto g = make_uniform_grid(1.0, 8);
  const auto flat = simulate_black_scholes(g, 100.0, 0.0, 5, 1);
  CHECK((flat.values().array() == 100.0).all());
  CHECK_THROWS_AS(simulate_black_scholes(g, 0.0, 0.2, 5, 1), InvalidArgument);

  const Index J = Index(1) << 16;
  const auto e = simulate_black_scholes(g, 100.0, 0.2, J, 5);
  CHECK((e.values().array() > 0).all());
  for (Index n = 1; n <= 8; ++n) {
    const auto m = oracle::mean_se(oracle::column(e.values(), n));
    CHECK(std::abs(m.mean - 100.0) < 3 * m.se);
  }
  // Var of ln(x_T/x0) = sigma^2 T; SE of a sample variance of a normal is var sqrt(2/(J-1)).
  Vector<double> logs = (e.values().col(8).array() / 100.0).log().matrix();
  const double mean = logs.mean();
  const double var = (logs.array() - mean).square().sum() / double(J - 1);
  CHECK(std::abs(var - 0.04) < 3 * 0.04 * std::sqrt(2.0 / double(J - 1)));
}

TEST_CASE("functionals on hand paths") {
  const auto g = make_uniform_grid(1.0, 4);
  RowMatrix<double> x(2, 5);
  x << 0, 1, -1, 2, 0,  //
      3, 3, 3, 3, 3;
  const PathEnsemble<double> e(g, x);
  CHECK(apply_functional(FunctionalKind::identity, e).values() == x);

  const auto mx = apply_functional(FunctionalKind::running_max, e).values();
  const auto mn = apply_functional(FunctionalKind::running_min, e).values();
  const auto rg = apply_functional(FunctionalKind::range, e).values();
  RowMatrix<double> expect_max(1, 5), expect_min(1, 5);
  expect_max << 0, 1, 1, 2, 2;
  expect_min << 0, 0, -1, -1, -1;
  CHECK(mx.row(0) == expect_max.row(0));
  CHECK(mn.row(0) == expect_min.row(0));
  CHECK(rg.row(0) == (expect_max - expect_min).row(0));
  CHECK((rg.row(1).array() == 0).all());

  const auto integral = apply_functional(FunctionalKind::time_integral, e).values();
  CHECK(integral(0, 1) == doctest::Approx(0.125));
  CHECK(integral(0, 4) == doctest::Approx(0.125 + 0 + 0.125 + 0.25));
  const auto avg = apply_functional(FunctionalKind::time_average, e).values();
  CHECK(avg(0, 0) == 0.0);
  CHECK(avg(0, 2) == doctest::Approx(0.125 / 0.5));
  for (Index n = 0; n < 5; ++n) CHECK(avg(1, n) == doctest::Approx(3.0));
}

TEST_CASE("functionals are causal") {
  const auto g = make_uniform_grid(1.0, 20);
  const auto e = simulate_brownian(g, 8, 3);
  const auto short_grid = make_uniform_grid(0.5, 10);
  const PathEnsemble<double> head(short_grid, e.values().leftCols(11));
  for (auto kind : {FunctionalKind::time_integral, FunctionalKind::running_max,
                    FunctionalKind::running_min, FunctionalKind::range}) {
    const auto full = apply_functional(kind, e).values();
    const auto part = apply_functional(kind, head).values();
    CHECK((full.leftCols(11) - part).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("running max of brownian motion") {
  const auto g = make_uniform_grid(1.0, 200);
  const Index J = Index(1) << 15;
  const auto y = apply_functional(FunctionalKind::running_max, simulate_brownian(g, J, 17));
  for (Index j = 0; j < 50; ++j)
    for (Index n = 1; n < g.size(); ++n) REQUIRE(y.values()(j, n) >= y.values()(j, n - 1));
  // Discrete monitoring lowers the mean by about 0.5826 sqrt(dt).
  const auto m = oracle::mean_se(oracle::column(y.values(), 200));
  const double expected = std::sqrt(2 / std::numbers::pi) - 0.5825971579390106 * std::sqrt(g.step());
  CHECK(std::abs(m.mean - expected) < 3 * m.se + 1e-3);
}

TEST_CASE("centering") {
  const auto g = make_uniform_grid(1.0, 3);
  RowMatrix<double> x(2, 4);
  x << 1, 2, 3, 4,  //
      -1, -2, -3, -4;
  auto [c, mean] = center_ensemble(PathEnsemble<double>(g, x));
  CHECK((mean.values().array() == 0).all());
  CHECK(c.values() == x);

  const auto e = simulate_brownian(make_uniform_grid(1.0, 32), 257, 8);
  auto [c2, m2] = center_ensemble(e);
  CHECK(c2.values().colwise().mean().cwiseAbs().maxCoeff() < 1e-15);
  const RowMatrix<double> back = c2.values().rowwise() + m2.values().transpose();
  // Restored to within one rounding of the subtraction.
  CHECK((back - e.values()).cwiseAbs().maxCoeff() <= 4 * std::numeric_limits<double>::epsilon() * (e.values().cwiseAbs().maxCoeff() + 1));
  auto [c3, m3] = center_ensemble(c2);
  CHECK(m3.values().cwiseAbs().maxCoeff() < 1e-16);
  CHECK_THROWS_AS(center_ensemble(PathEnsemble<double>(g, x.topRows(1))), InvalidArgument);
}

TEST_CASE("running max mean matches the continuous law with exact bridge maxima") {
  const auto g = make_uniform_grid(1.0, 50);
  const Index J = Index(1) << 15;
  auto [x, m] = simulate_brownian_with_max(g, J, 23);
  CHECK((m.values().array() >= x.values().array()).all());
  auto [cm, mean] = center_ensemble(m);
  for (Index n = 1; n < g.size(); n += 7) {
    const double t = g.node(n);
    const auto ms = oracle::mean_se(oracle::column(m.values(), n));
    CHECK(std::abs(mean[n] - std::sqrt(2 * t / std::numbers::pi)) < 3 * ms.se);
  }
}
