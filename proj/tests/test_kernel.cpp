#include <doctest.h>

#include <cmath>
#include <numbers>

#include "klmc/kernel.hpp"
#include "klmc/simulate.hpp"
#include "support/oracles.hpp"

using namespace klmc;
using std::numbers::pi;

TEST_CASE("analytic kernels at hand points") {
  CHECK(analytic_kernel(KernelKind::brownian, 0.3, 0.7) == 0.3);
  CHECK(analytic_kernel(KernelKind::brownian, 0.7, 0.3) == 0.3);
  CHECK(analytic_kernel(KernelKind::time_integral, 1.0, 1.0) == doctest::Approx(1.0 / 3));
  CHECK(analytic_kernel(KernelKind::running_max, 1.0, 1.0) == doctest::Approx(1 - 2 / pi));
  CHECK(analytic_kernel(KernelKind::brownian_bridge, 1.0, 1.0) == 0.0);
  CHECK(analytic_kernel(KernelKind::time_average, 0.0, 0.0) == 0.0);
  CHECK(analytic_kernel(KernelKind::running_max, 0.0, 0.5) == 0.0);
  CHECK(analytic_kernel(KernelKind::time_average, 0.2, 0.6) == doctest::Approx(0.1 - 0.04 / 3.6));
  CHECK_THROWS_AS(analytic_kernel(KernelKind::empirical, 0.1, 0.2), InvalidArgument);
}

TEST_CASE("empirical kernel") {
  const auto g = make_uniform_grid(1.0, 4);
  RowMatrix<double> same(3, 5);
  for (Index j = 0; j < 3; ++j) same.row(j) << 1, 2, 3, 4, 5;
  const auto km = build_kernel_matrix(KernelSpec<double>::empirical(PathEnsemble<double>(g, same)), g);
  CHECK(km.entries.isZero(0.0));
  CHECK(km.mean.values() == same.row(0).transpose());
  CHECK_THROWS_AS(KernelSpec<double>::empirical(PathEnsemble<double>(g, same.topRows(1))),
                  InvalidArgument);

  const auto g8 = make_uniform_grid(1.0, 8);
  const Index J = Index(1) << 15;
  const auto e = simulate_brownian(g8, J, 9);
  const auto emp = build_kernel_matrix(KernelSpec<double>::empirical(e), g8);
  for (Index n = 1; n <= 8; ++n)
    for (Index m = 1; m <= n; ++m) {
      // Var of x_s x_t for centered Gaussians is st + (s^t)^2.
      const double s = g8.node(m), t = g8.node(n);
      const double se = std::sqrt((s * t + s * s) / double(J));
      CHECK(std::abs(emp.entries(n, m) - s) < 3 * se);
    }
}

TEST_CASE("eigenvalues of analytic kernels") {
  const auto g = make_uniform_grid(1.0, 512);
  const auto bm = solve_eigen(build_kernel_matrix(KernelSpec<double>::analytic(KernelKind::brownian), g), 10);
  const auto bb =
      solve_eigen(build_kernel_matrix(KernelSpec<double>::analytic(KernelKind::brownian_bridge), g), 10);
  for (Index k = 1; k <= 10; ++k) {
    CHECK(bm.eigenvalues[k - 1] == doctest::Approx(1 / (pi * pi * (k - 0.5) * (k - 0.5))).epsilon(0.005));
    CHECK(bb.eigenvalues[k - 1] == doctest::Approx(1 / (pi * pi * k * k)).epsilon(0.005));
  }
}

TEST_CASE("two-node hand case") {
  const auto g = make_uniform_grid(1.0, 1);
  Matrix<double> k(2, 2);
  k << 0, 0, 0, 1;
  const KernelMatrix<double> km{g, k, DiscretePath<double>(g, Vector<double>::Zero(2))};
  const auto p = solve_eigen(km, 2);
  CHECK(p.eigenvalues[0] == doctest::Approx(0.5));
  CHECK(p.eigenvalues[1] == doctest::Approx(0.0));
  CHECK(p.functions.functions()(0, 0) == doctest::Approx(0.0));
  CHECK(p.functions.functions()(0, 1) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("eigen solve invariants") {
  const auto g = make_uniform_grid(1.0, 128);
  for (auto kind : {KernelKind::brownian, KernelKind::time_integral, KernelKind::time_average,
                    KernelKind::running_max}) {
    CAPTURE(to_string(kind));
    const auto km = build_kernel_matrix(KernelSpec<double>::analytic(kind), g);
    const Index full = g.size();
    const auto p = solve_eigen(km, full);
    const auto w = g.trapezoid_weights();
    const auto& F = p.functions.functions();
    const double l1 = p.eigenvalues[0];

    // Trace identity.
    const double trace = w.dot(km.entries.diagonal());
    CHECK(std::abs(p.spectrum.sum() - trace) <= 1e-8 * trace);
    // Ordering, orthonormality, equation residual, sign convention.
    for (Index k = 1; k < full; ++k) CHECK(p.eigenvalues[k] <= p.eigenvalues[k - 1]);
    const Matrix<double> G = F * w.asDiagonal() * F.transpose();
    CHECK((G - Matrix<double>::Identity(full, full)).cwiseAbs().maxCoeff() <= 1e-8);
    const Matrix<double> lhs = km.entries * w.asDiagonal() * F.transpose();
    const Matrix<double> rhs = F.transpose() * p.eigenvalues.asDiagonal();
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-8 * l1);
    for (Index k = 0; k < 10; ++k) {
      const double integral = w.dot(F.row(k).transpose());
      if (std::abs(integral) > 1e-10) CHECK(integral > 0);
    }
    // Mercer residual shrinks to zero with the full basis.
    CHECK(mercer_residual(km, p) <= 1e-8 * l1);
    CHECK(mercer_residual(km, p, 0) == doctest::Approx(km.entries.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("mercer residual tail bound") {
  const auto g = make_uniform_grid(1.0, 512);
  const auto km = build_kernel_matrix(KernelSpec<double>::analytic(KernelKind::brownian), g);
  const auto p = solve_eigen(km, 64);
  const double r = mercer_residual(km, p);
  CHECK(r < 1e-2);
  CHECK(r > 1e-4);
}

TEST_CASE("negative spectra are rejected") {
  const auto g = make_uniform_grid(1.0, 2);
  Matrix<double> k = Matrix<double>::Identity(3, 3);
  k(1, 1) = -1;
  const KernelMatrix<double> km{g, k, DiscretePath<double>(g, Vector<double>::Zero(3))};
  CHECK_THROWS_AS(solve_eigen(km, 1), NotPositiveSemidefinite);
  CHECK_THROWS_AS(solve_eigen(km, 0), InvalidArgument);
  CHECK_THROWS_AS(solve_eigen(km, 4), InvalidArgument);
}

TEST_CASE("empirical eigenvalues approach the analytic ones") {
  const auto g = make_uniform_grid(1.0, 64);
  const auto exact =
      solve_eigen(build_kernel_matrix(KernelSpec<double>::analytic(KernelKind::brownian), g), 5);
  auto gap = [&](Index J) {
    const auto e = simulate_brownian(g, J, 2024);
    const auto p = solve_eigen(build_kernel_matrix(KernelSpec<double>::empirical(e), g), 5);
    return ((p.eigenvalues - exact.eigenvalues).array() / exact.eigenvalues.array()).abs().maxCoeff();
  };
  const double small = gap(Index(1) << 12), large = gap(Index(1) << 16);
  CHECK(large < small);
  // Relative SE of a Gaussian variance estimate is sqrt(2/J).
  CHECK(large < 3 * std::sqrt(2.0 / double(1 << 16)) * 2);
}

TEST_CASE("running max kernel from exact bridge maxima") {
  const auto g = make_uniform_grid(1.0, 16);
  const Index J = Index(1) << 15;
  auto [x, m] = simulate_brownian_with_max(g, J, 41);
  const auto emp = build_kernel_matrix(KernelSpec<double>::empirical(m), g);
  auto [c, mean] = center_ensemble(m);
  int outside = 0, total = 0;
  for (Index n = 1; n <= 16; ++n)
    for (Index k = 1; k <= n; ++k) {
      Vector<double> prod = c.values().col(n).cwiseProduct(c.values().col(k));
      const double mu = prod.mean();
      const double se = std::sqrt((prod.array() - mu).square().sum() / double(J - 1) / double(J));
      const double exact = analytic_kernel(KernelKind::running_max, g.node(k), g.node(n));
      ++total;
      if (std::abs(emp.entries(n, k) - exact) > 3 * se) ++outside;
    }
  // 3-SE bands hold cellwise up to the expected handful of 0.3% excursions.
  CHECK(outside <= 2);
  CAPTURE(total);
}
