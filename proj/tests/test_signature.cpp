#include <doctest.h>

#include <cmath>
#include <numbers>

#include "klmc/functional.hpp"
#include "klmc/signature.hpp"
#include "klmc/simulate.hpp"

using namespace klmc;

namespace {

DiscretePath<double> line(const TimeGrid<double>& g) {
  return DiscretePath<double>::sample(g, [](double t) { return t; });
}

}  // namespace

TEST_CASE("words") {
  CHECK(Word::time_weighted(0).str() == "10");
  CHECK(Word::time_weighted(2).str() == "1000");
  CHECK(words_up_to(3).size() == 15);
  CHECK(Word("1") < Word("00"));
  CHECK(Word("01") < Word("10"));
  CHECK_THROWS_AS(Word("12"), InvalidArgument);
  const auto g = make_uniform_grid(1.0, 4);
  CHECK_THROWS_AS(signature_terms(line(g), {Word("10")}), InvalidArgument);
}

TEST_CASE("low-order terms") {
  const auto g = make_uniform_grid(1.0, 1000);
  const auto x = simulate_brownian(g, 1, 3).path(0);
  const auto sig = signature_terms(x, words_up_to(4));
  for (Index n = 0; n <= 1000; n += 37) {
    const double t = g.node(n), dx = x[n] - x[0];
    CHECK(sig[Word()][n] == 1.0);
    CHECK(sig[Word("0")][n] == t);
    CHECK(sig[Word("00")][n] == doctest::Approx(t * t / 2).epsilon(1e-14));
    CHECK(sig[Word("000")][n] == doctest::Approx(t * t * t / 6).epsilon(1e-14));
    CHECK(std::abs(sig[Word("11")][n] - dx * dx / 2) <= 1e-12);
    CHECK(std::abs(sig[Word("111")][n] - dx * dx * dx / 6) <= 1e-10);
    CHECK(std::abs(sig[Word("1111")][n] - dx * dx * dx * dx / 24) <= 1e-10);
    // Shuffle: S_0 S_1 = S_01 + S_10.
    CHECK(std::abs(sig[Word("01")][n] + sig[Word("10")][n] - t * dx) <= 1e-12);
  }
  for (const auto& [w, v] : sig.terms)
    if (!w.empty()) CHECK(v[0] == 0.0);

  const auto lt = signature_terms(line(g), words_up_to(2));
  CHECK(lt[Word("10")][1000] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("prefix consistency") {
  const auto g = make_uniform_grid(1.0, 200);
  const auto x = simulate_brownian(g, 1, 8).path(0);
  const auto small = signature_terms(x, {Word(), Word("1"), Word("10")});
  const auto big = signature_terms(x, words_up_to(5));
  CHECK(small[Word("10")] == big[Word("10")]);
}

TEST_CASE("time reversal") {
  const auto g = make_uniform_grid(1.0, 10);
  const auto c = DiscretePath<double>::sample(g, [](double) { return 2.0; });
  CHECK(time_reverse(c).values() == c.values());
  const auto r = time_reverse(line(g));
  for (Index n = 0; n <= 10; ++n) CHECK(r[n] == doctest::Approx(1 - g.node(n)));
  const auto x = simulate_brownian(g, 1, 2).path(0);
  CHECK(time_reverse(time_reverse(x)).values() == x.values());
}

TEST_CASE("iterated time integrals") {
  const auto g = make_uniform_grid(1.0, 1000);
  const auto v = iterated_time_integrals(line(g), 2);
  CHECK(v[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(v[1] == doctest::Approx(1.0 / 6).epsilon(1e-6));
  const auto zero = DiscretePath<double>(g, Vector<double>::Zero(g.size()));
  CHECK(iterated_time_integrals(zero, 4).isZero(0.0));

  const auto g4 = make_uniform_grid(1.0, 10000);
  const auto x = simulate_brownian(g4, 1, 12).path(0);
  const auto sig = signature_terms(x, {Word(), Word("1"), Word("10"), Word("100")});
  CHECK(std::abs(iterated_time_integrals(x, 2)[1] - sig[Word("100")][10000]) < 1e-4);
}

TEST_CASE("legendre coefficients from the signature") {
  const auto g = make_uniform_grid(1.0, 10000);
  const auto c = legendre_coeffs_from_signature(line(g), 4);
  CHECK(c.values[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(c.values[1] == doctest::Approx(std::sqrt(3.0) / 6).epsilon(1e-8));
  CHECK(c.values.tail(2).cwiseAbs().maxCoeff() < 1e-8);
  const auto zero = DiscretePath<double>(g, Vector<double>::Zero(g.size()));
  CHECK(legendre_coeffs_from_signature(zero, 5).values.isZero(0.0));

  const auto x = simulate_brownian(g, 1, 21).path(0);
  const auto direct = project(x, shifted_legendre_basis(g, 8));
  const auto via = legendre_coeffs_from_signature(x, 8);
  CHECK((direct.values - via.values).cwiseAbs().maxCoeff() <= 1e-5);
  CHECK_THROWS_AS(legendre_coeffs_from_signature(x, 31), UnsupportedOrder);

  // A nonzero start only shifts xi_0.
  const auto shifted = DiscretePath<double>(g, (x.values().array() + 3.0).matrix());
  const auto vs = legendre_coeffs_from_signature(shifted, 8);
  CHECK(vs.values[0] == doctest::Approx(via.values[0] + 3.0).epsilon(1e-12));
}

TEST_CASE("signature reconstruction") {
  const auto g = make_uniform_grid(1.0, 10000);
  CHECK((signature_reconstruct(line(g), 3).values() - line(g).values()).cwiseAbs().maxCoeff() < 1e-6);
  const auto zero = DiscretePath<double>(g, Vector<double>::Zero(g.size()));
  CHECK(signature_reconstruct(zero, 6).values().isZero(0.0));
  const auto x = simulate_brownian(g, 1, 33).path(0);
  const auto rec = signature_reconstruct(x, 8);
  const auto same = reconstruct(legendre_coeffs_from_signature(x, 8), 8);
  CHECK((rec.values() - same.values()).cwiseAbs().maxCoeff() < 1e-10);
  const auto direct = reconstruct(project(x, shifted_legendre_basis(g, 8)), 8);
  const Vector<double> d = rec.values() - direct.values();
  CHECK(std::sqrt(g.trapezoid_weights().dot(d.cwiseAbs2())) <= 1e-5);

  double prev = INFINITY;
  for (Index K = 1; K <= 12; ++K) {
    const Vector<double> r = x.values() - signature_reconstruct(x, K).values();
    const double l2 = std::sqrt(g.trapezoid_weights().dot(r.cwiseAbs2()));
    CHECK(l2 <= prev + 1e-12);
    prev = l2;
  }
}

TEST_CASE("legendre brownian eigenvalues") {
  const auto lam = legendre_bm_eigenvalues(4);
  const char* den[] = {"3", "10", "42", "90"};
  for (int k = 0; k < 4; ++k) {
    CHECK(lam[size_t(k)].numerator == "1");
    CHECK(lam[size_t(k)].denominator == den[k]);
  }
  CHECK(legendre_eigenvalue_closed_form_holds(11));
  for (Index K = 0; K <= 10; ++K) CHECK(legendre_eigenvalue_partial_sum_holds(K));
  CHECK(legendre_bm_eigenvalues(20).size() == 20);
  CHECK_THROWS_AS(legendre_bm_eigenvalues(21), UnsupportedOrder);
  CHECK_THROWS_AS(legendre_bm_eigenvalues(0), InvalidArgument);
}

TEST_CASE("signature payoff regression") {
  const auto g = make_uniform_grid(1.0, 100);
  const auto x = simulate_brownian(g, 400, 71);

  const auto integral = signature_payoff_regression(x, apply_functional(FunctionalKind::time_integral, x), 2, 0.0);
  for (const auto& [w, c] : integral.coefficients) {
    CAPTURE(w.str());
    CHECK(std::abs(c - (w.str() == "10" ? 1.0 : 0.0)) <= 1e-8);
  }
  CHECK(integral.relative_residual <= 1e-8);

  const auto ident = signature_payoff_regression(x, x, 2, 0.0);
  CHECK(std::abs(ident.coefficients.at(Word("1")) - 1.0) <= 1e-8);
  CHECK(ident.relative_residual <= 1e-8);

  const auto mx = apply_functional(FunctionalKind::running_max, x);
  const auto r3 = signature_payoff_regression(x, mx, 3, 0.0);
  const auto r4 = signature_payoff_regression(x, mx, 4, 0.0);
  CHECK(r4.relative_residual <= r3.relative_residual);

  const PathEnsemble<double> flat(g, RowMatrix<double>::Zero(5, g.size()));
  CHECK_THROWS_AS(signature_payoff_regression(flat, flat, 1, 0.0), RankDeficient);
  CHECK_NOTHROW(signature_payoff_regression(flat, flat, 1, 0.1));
}
