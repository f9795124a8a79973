// Command-line front end: basis, convergence, price, signature, offline, online.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>

#include "klmc/config.hpp"
#include "klmc/convergence.hpp"
#include "klmc/io.hpp"
#include "klmc/pricing.hpp"
#include "klmc/signature.hpp"
#include "klmc/simulate.hpp"

namespace fs = std::filesystem;
using namespace klmc;

namespace {

struct Invocation {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

/// Config plus command-line overrides, validated for one subcommand.
struct Run {
  RunConfig cfg;
  fs::path out;

  std::uint64_t seed() const { return cfg.seed(); }
};

Run prepare(const Invocation& inv, std::set<std::string> allowed,
            const std::set<std::string>& required) {
  Run run{RunConfig::load(inv.config_path), {}};
  if (inv.seed) run.cfg.set("seed", std::to_string(*inv.seed));
  if (inv.out) run.cfg.set("out", *inv.out);
  allowed.insert({"seed", "out"});
  run.cfg.validate(allowed, required);
  if (!run.cfg.has("seed")) run.cfg.set("seed", "0");
  run.out = run.cfg.text("out", "out");
  return run;
}

double elapsed_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

ModelParams<double> model_params(const RunConfig& cfg) {
  return {parse_model(cfg.text("model", "black_scholes")), cfg.number("x0"), cfg.number("sigma"),
          cfg.number("T", 1.0)};
}

// ---------------------------------------------------------------------------

int cmd_basis(const Invocation& inv) {
  auto run = prepare(inv, {"family", "N", "T", "K", "K_bar", "functional", "J"}, {"family", "N"});
  const auto& cfg = run.cfg;
  const BasisFamily family = parse_family(cfg.text("family"));
  const TimeGrid<double> grid(cfg.number("T", 1.0), cfg.integer("N"));

  const Basis<double> basis = [&] {
    switch (family) {
      case BasisFamily::haar_schauder:
        return haar_schauder_basis(grid, cfg.integer("K_bar"));
      case BasisFamily::empirical_kl: {
        const auto functional = parse_functional(cfg.text("functional", "identity"));
        const auto x = simulate_brownian(grid, cfg.integer("J", 4096), run.seed());
        return empirical_kl_basis(apply_functional(functional, x), cfg.integer("K"));
      }
      default:
        return fixed_basis(family, grid, cfg.integer("K"));
    }
  }();
  io::write_basis_csv(run.out / (to_string(family) + ".csv"), basis);
  return 0;
}

int cmd_convergence(const Invocation& inv) {
  auto run = prepare(inv, {"families", "functionals", "K", "N", "T", "J"},
                     {"families", "functionals", "K", "N", "J"});
  const auto& cfg = run.cfg;
  std::vector<BasisFamily> families;
  for (const auto& name : cfg.words("families")) families.push_back(parse_family(name));
  std::vector<FunctionalKind> functionals;
  for (const auto& name : cfg.words("functionals")) functionals.push_back(parse_functional(name));
  auto counts = cfg.integers("K");
  std::sort(counts.begin(), counts.end());
  counts.erase(std::unique(counts.begin(), counts.end()), counts.end());
  require(counts.front() >= 1, "convergence: K values must be >= 1");
  const Index k_max = counts.back();

  const TimeGrid<double> grid(cfg.number("T", 1.0), cfg.integer("N"));
  const auto x = simulate_brownian(grid, cfg.integer("J"), run.seed());

  fs::create_directories(run.out);
  std::ofstream out(run.out / "convergence.csv", std::ios::binary);
  out << "K,family,functional,route,epsilon,se,variance_explained,slope\n";
  for (const auto family : families) {
    for (const auto functional : functionals) {
      std::optional<Basis<double>> path_basis, fun_basis;
      if (family == BasisFamily::empirical_kl) {
        path_basis = empirical_kl_basis(x, k_max);
        fun_basis = empirical_kl_basis(apply_functional(functional, x), k_max);
      } else {
        path_basis = fun_basis = fixed_basis(family, grid, k_max);
      }
      const auto points = route_errors(functional, x, *path_basis, *fun_basis, counts);
      std::vector<double> eps_path, eps_fun;
      for (const auto& p : points) {
        eps_path.push_back(p.eps_path);
        eps_fun.push_back(p.eps_functional);
      }
      auto slope = [&](const std::vector<double>& eps) {
        if (counts.size() < 2) return std::numeric_limits<double>::quiet_NaN();
        for (double e : eps)
          if (!(e > 0)) return std::numeric_limits<double>::quiet_NaN();
        return loglog_slope(counts, eps);
      };
      const double s_path = slope(eps_path), s_fun = slope(eps_fun);
      for (const auto& p : points) {
        const std::string head = std::to_string(p.K) + "," + to_string(family) + "," +
                                 to_string(functional) + ",";
        out << head << "project_path," << io::format_number(p.eps_path) << ','
            << io::format_number(p.se_path) << ',' << io::format_number(p.ve_path) << ','
            << io::format_number(s_path) << '\n';
        out << head << "project_functional," << io::format_number(p.eps_functional) << ','
            << io::format_number(p.se_functional) << ',' << io::format_number(p.ve_functional)
            << ',' << io::format_number(s_fun) << '\n';
      }
    }
  }
  if (!out) throw std::runtime_error("convergence: write failed");
  return 0;
}

void emit_surface(const fs::path& out, const PriceSurface<double>& surface) {
  io::write_surface_csv(out / "surface.csv", out / "surface_se.csv", surface);
}

void timing_line(const std::string& method, const std::string& size_label, Index size,
                 std::optional<double> mse, double seconds) {
  std::cout << "method=" << method << ' ' << size_label << '=' << size
            << " mse=" << (mse ? io::format_number(*mse) : std::string("nan"))
            << " seconds=" << seconds << '\n';
}

int cmd_price(const Invocation& inv) {
  auto run = prepare(inv,
                     {"model", "x0", "sigma", "T", "functional", "payoff", "moneyness",
                      "maturities", "K", "N_off", "J_off", "J", "N", "benchmark", "reference_N",
                      "reference_J", "analytic"},
                     {"x0", "sigma", "functional", "payoff", "moneyness", "maturities", "J"});
  const auto& cfg = run.cfg;
  const auto params = model_params(cfg);
  const auto functional = parse_functional(cfg.text("functional"));
  const auto payoff = parse_payoff(cfg.text("payoff"));
  const auto moneyness = cfg.numbers("moneyness");
  const auto maturities = cfg.maturities("maturities", params.horizon);
  const Index J = cfg.integer("J");
  const bool benchmark = cfg.flag("benchmark");
  // Parse every size before any simulation so config errors surface first.
  const Index N = benchmark ? cfg.integer("N") : 0;
  const Index K = benchmark ? 0 : cfg.integer("K");
  const Index N_off = benchmark ? 0 : cfg.integer("N_off");
  const Index J_off = benchmark ? 0 : cfg.integer("J_off");
  const Index reference_N = cfg.integer("reference_N", 0);  // 0: no reference run
  const Index reference_J = cfg.integer("reference_J", J);
  const std::uint64_t seed = run.seed();

  const auto start = std::chrono::steady_clock::now();
  const PriceSurface<double> surface = [&] {
    if (benchmark)
      return mc_benchmark(params, functional, payoff, moneyness, maturities, N, J, seed);
    const auto model = klmc_offline(functional, params, K, N_off, J_off, seed,
                                    OfflineOptions{cfg.flag("analytic", true)});
    // Online uniforms come from their own substreams; the offline seed is reused.
    return klmc_online(model, payoff, moneyness, maturities, J, seed);
  }();
  const double seconds = elapsed_since(start);
  emit_surface(run.out, surface);

  std::optional<double> mse;
  if (reference_N > 0) {
    const auto reference = mc_benchmark(params, functional, payoff, moneyness, maturities,
                                        reference_N, reference_J, seed + 1);
    mse = mse_surface(surface, reference);
  }
  if (benchmark)
    timing_line("mc", "N", N, mse, seconds);
  else
    timing_line("klmc", "K", K, mse, seconds);
  return 0;
}

int cmd_signature(const Invocation& inv) {
  auto run = prepare(inv,
                     {"path", "N", "T", "level", "K", "functional", "J", "regression_level",
                      "ridge"},
                     {"path", "N"});
  const auto& cfg = run.cfg;
  const TimeGrid<double> grid(cfg.number("T", 1.0), cfg.integer("N"));
  const std::string kind = cfg.text("path");
  const Index level = cfg.integer("level", 3);
  const std::vector<Index> counts = cfg.has("K") ? cfg.integers("K") : std::vector<Index>{};
  require(level >= 0 && level <= 12, "signature: level must be in [0, 12]");

  const DiscretePath<double> path = [&] {
    const double T = grid.horizon();
    if (kind == "identity") return DiscretePath<double>::sample(grid, [](double t) { return t; });
    if (kind == "sine")
      return DiscretePath<double>::sample(
          grid, [T](double t) { return std::sin(2 * std::numbers::pi * t / T); });
    if (kind == "brownian") return simulate_brownian(grid, 1, run.seed()).path(0);
    throw InvalidArgument("signature: path must be identity, sine or brownian");
  }();

  std::optional<FunctionalKind> functional;
  if (cfg.has("functional")) functional = parse_functional(cfg.text("functional"));
  const Index J = functional ? cfg.integer("J") : 0;
  const Index reg_level = cfg.integer("regression_level", 2);
  const double ridge = cfg.number("ridge", 0.0);

  const auto sig = signature_terms(path, words_up_to(level));
  std::map<Word, double> terminal;
  for (const auto& [w, v] : sig.terms) terminal[w] = v[grid.intervals()];
  io::write_word_csv(run.out / "signature.csv", terminal);

  if (!counts.empty()) {
    std::ofstream out(run.out / "reconstruction.csv", std::ios::binary);
    out << "K,l2_residual,max_abs_residual,max_abs_vs_projection\n";
    const Vector<double> w = grid.trapezoid_weights();
    for (Index K : counts) {
      const auto rec = signature_reconstruct(path, K);
      const auto direct = reconstruct(project(path, shifted_legendre_basis(grid, K)), K);
      const Vector<double> r = path.values() - rec.values();
      out << K << ',' << io::format_number(std::sqrt(w.dot(r.cwiseAbs2()))) << ','
          << io::format_number(r.cwiseAbs().maxCoeff()) << ','
          << io::format_number((rec.values() - direct.values()).cwiseAbs().maxCoeff()) << '\n';
    }
  }

  if (functional) {
    const auto x = simulate_brownian(grid, J, run.seed());
    const auto fit =
        signature_payoff_regression(x, apply_functional(*functional, x), reg_level, ridge);
    io::write_word_csv(run.out / "regression.csv", fit.coefficients);
    std::cout << "regression relative_residual=" << io::format_number(fit.relative_residual)
              << '\n';
  }
  return 0;
}

int cmd_offline(const Invocation& inv) {
  auto run = prepare(inv,
                     {"model", "x0", "sigma", "T", "functional", "K", "N_off", "J_off", "analytic"},
                     {"x0", "sigma", "functional", "K", "N_off", "J_off"});
  const auto& cfg = run.cfg;
  const auto start = std::chrono::steady_clock::now();
  const auto model =
      klmc_offline(parse_functional(cfg.text("functional")), model_params(cfg), cfg.integer("K"),
                   cfg.integer("N_off"), cfg.integer("J_off"), run.seed(),
                   OfflineOptions{cfg.flag("analytic", true)});
  io::save_model(run.out, model);
  std::cout << "offline K=" << model.size() << " seconds=" << elapsed_since(start) << '\n';
  return 0;
}

int cmd_online(const Invocation& inv) {
  auto run = prepare(inv, {"model_dir", "payoff", "moneyness", "maturities", "J"},
                     {"model_dir", "payoff", "moneyness", "maturities", "J"});
  const auto& cfg = run.cfg;
  const auto model = io::load_model(cfg.text("model_dir"));
  const auto payoff = parse_payoff(cfg.text("payoff"));
  const auto moneyness = cfg.numbers("moneyness");
  const auto maturities = cfg.maturities("maturities", model.params.horizon);
  const auto start = std::chrono::steady_clock::now();
  const auto surface = klmc_online(model, payoff, moneyness, maturities, cfg.integer("J"), run.seed());
  const double seconds = elapsed_since(start);
  emit_surface(run.out, surface);
  timing_line("klmc_online", "K", model.size(), std::nullopt, seconds);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Karhunen-Loeve projections and KLMC pricing"};
  app.require_subcommand(1);
  Invocation inv;
  int (*handler)(const Invocation&) = nullptr;

  auto add = [&](const char* name, const char* help, int (*fn)(const Invocation&)) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", inv.config_path, "key = value run configuration")->required();
    sub->add_option("--seed", inv.seed, "overrides the config seed");
    sub->add_option("--out", inv.out, "output directory (overrides the config)");
    sub->callback([&handler, fn] { handler = fn; });
  };
  add("basis", "sample a basis family to <family>.csv", cmd_basis);
  add("convergence", "projection errors per K, family, functional and route", cmd_convergence);
  add("price", "price surface by KLMC or the Monte Carlo benchmark", cmd_price);
  add("signature", "signature terms, Legendre reconstruction and payoff regression",
      cmd_signature);
  add("offline", "build and persist a KLMC model", cmd_offline);
  add("online", "price from a persisted KLMC model", cmd_online);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    return handler(inv);
  } catch (const InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const UnsupportedOrder& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
