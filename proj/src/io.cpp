#include "klmc/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace klmc::io {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& file) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  return out;
}

std::ifstream open_in(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  return in;
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_number(const std::string& text) {
  double v = 0;
  const char* first = text.data();
  const char* last = first + text.size();
  while (first < last && *first == ' ') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw InvalidArgument("not a number: '" + text + "'");
  return v;
}

template <typename Row>
void write_row(std::ostream& out, const Row& row) {
  for (Index i = 0; i < static_cast<Index>(row.size()); ++i) {
    if (i) out << ',';
    out << format_number(row[i]);
  }
  out << '\n';
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("format_number failed");
  return std::string(buf, ptr);
}

CsvTable read_numeric_csv(const fs::path& file, bool has_header) {
  auto in = open_in(file);
  CsvTable table;
  std::string line;
  if (has_header && std::getline(in, line)) table.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& cell : split(line)) row.push_back(parse_number(cell));
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_ensemble_csv(const fs::path& file, const PathEnsemble<double>& ensemble) {
  auto out = open_out(file);
  write_row(out, ensemble.grid().nodes());
  for (Index j = 0; j < ensemble.paths(); ++j) write_row(out, ensemble.values().row(j));
}

PathEnsemble<double> read_ensemble_csv(const fs::path& file) {
  const auto table = read_numeric_csv(file, true);
  require(table.header.size() >= 2, "read_ensemble_csv: need at least two nodes");
  require(!table.rows.empty(), "read_ensemble_csv: no paths");
  const double horizon = parse_number(table.header.back());
  const TimeGrid<double> grid(horizon, static_cast<Index>(table.header.size()) - 1);
  RowMatrix<double> values(static_cast<Index>(table.rows.size()), grid.size());
  for (size_t j = 0; j < table.rows.size(); ++j) {
    require(static_cast<Index>(table.rows[j].size()) == grid.size(),
            "read_ensemble_csv: ragged row");
    for (Index n = 0; n < grid.size(); ++n) values(Index(j), n) = table.rows[j][size_t(n)];
  }
  return PathEnsemble<double>(grid, std::move(values));
}

void write_basis_csv(const fs::path& file, const Basis<double>& basis) {
  auto out = open_out(file);
  write_row(out, basis.grid().nodes());
  for (Index k = 0; k < basis.size(); ++k) write_row(out, basis.functions().row(k));
}

void write_eigen_csv(const fs::path& file, const Vector<double>& eigenvalues,
                     const Basis<double>& functions) {
  auto out = open_out(file);
  out << "lambda";
  for (Index n = 0; n < functions.grid().size(); ++n)
    out << ',' << format_number(functions.grid().node(n));
  out << '\n';
  for (Index k = 0; k < functions.size(); ++k) {
    out << format_number(eigenvalues[k]);
    for (Index n = 0; n < functions.grid().size(); ++n)
      out << ',' << format_number(functions.functions()(k, n));
    out << '\n';
  }
}

void write_word_csv(const fs::path& file, const std::map<Word, double>& values) {
  auto out = open_out(file);
  out << "word,value\n";
  for (const auto& [word, v] : values) out << word.str() << ',' << format_number(v) << '\n';
}

void write_surface_csv(const fs::path& prices_file, const fs::path& errors_file,
                       const PriceSurface<double>& surface) {
  auto emit = [&](const fs::path& file, const Matrix<double>& values) {
    auto out = open_out(file);
    out << "m\\tau";
    for (double tau : surface.maturities) out << ',' << format_number(tau);
    out << '\n';
    for (size_t m = 0; m < surface.moneyness.size(); ++m) {
      out << format_number(surface.moneyness[m]);
      for (Index c = 0; c < values.cols(); ++c) out << ',' << format_number(values(Index(m), c));
      out << '\n';
    }
  };
  emit(prices_file, surface.prices);
  emit(errors_file, surface.std_errors);
}

void save_model(const fs::path& dir, const KlmcModel<double>& model) {
  fs::create_directories(dir);
  {
    auto out = open_out(dir / "meta");
    out << "functional=" << to_string(model.functional) << '\n'
        << "model=" << to_string(model.params.model) << '\n'
        << "x0=" << format_number(model.params.spot) << '\n'
        << "sigma=" << format_number(model.params.sigma) << '\n'
        << "T=" << format_number(model.params.horizon) << '\n'
        << "K=" << model.size() << '\n'
        << "N_off=" << model.grid().intervals() << '\n'
        << "J_off=" << model.offline_paths << '\n'
        << "seed=" << model.seed << '\n'
        << "kernel=" << (model.analytic_kernel ? "analytic" : "empirical") << '\n';
  }
  {
    auto out = open_out(dir / "mean.csv");
    out << "t,mean\n";
    for (Index n = 0; n < model.grid().size(); ++n)
      out << format_number(model.grid().node(n)) << ',' << format_number(model.mean[n]) << '\n';
  }
  write_eigen_csv(dir / "eigen.csv", model.eigenvalues, model.eigenfunctions);
  {
    auto out = open_out(dir / "quantiles.csv");
    for (Index k = 0; k < model.size(); ++k) out << (k ? "," : "") << "xi_" << (k + 1);
    out << '\n';
    for (Index i = 0; i < model.offline_paths; ++i) {
      for (Index k = 0; k < model.size(); ++k)
        out << (k ? "," : "") << format_number(model.quantiles[size_t(k)].sorted()[size_t(i)]);
      out << '\n';
    }
  }
}

KlmcModel<double> load_model(const fs::path& dir) {
  std::map<std::string, std::string> meta;
  {
    auto in = open_in(dir / "meta");
    std::string line;
    while (std::getline(in, line)) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      meta[line.substr(0, eq)] = line.substr(eq + 1);
    }
  }
  auto get = [&](const std::string& key) {
    auto it = meta.find(key);
    if (it == meta.end()) throw InvalidArgument("model meta is missing '" + key + "'");
    return it->second;
  };
  ModelParams<double> params{parse_model(get("model")), parse_number(get("x0")),
                             parse_number(get("sigma")), parse_number(get("T"))};
  const Index K = std::stoll(get("K"));
  const Index N = std::stoll(get("N_off"));
  const Index J = std::stoll(get("J_off"));
  const TimeGrid<double> grid(params.horizon, N);

  const auto mean_table = read_numeric_csv(dir / "mean.csv", true);
  require(static_cast<Index>(mean_table.rows.size()) == grid.size(), "mean.csv: wrong length");
  Vector<double> mean(grid.size());
  for (Index n = 0; n < grid.size(); ++n) mean[n] = mean_table.rows[size_t(n)].at(1);

  const auto eig = read_numeric_csv(dir / "eigen.csv", true);
  require(static_cast<Index>(eig.rows.size()) == K, "eigen.csv: wrong number of pairs");
  Vector<double> lambda(K);
  RowMatrix<double> F(K, grid.size());
  for (Index k = 0; k < K; ++k) {
    const auto& row = eig.rows[size_t(k)];
    require(static_cast<Index>(row.size()) == grid.size() + 1, "eigen.csv: wrong row length");
    lambda[k] = row[0];
    for (Index n = 0; n < grid.size(); ++n) F(k, n) = row[size_t(n + 1)];
  }

  const auto q = read_numeric_csv(dir / "quantiles.csv", true);
  require(static_cast<Index>(q.rows.size()) == J, "quantiles.csv: wrong number of rows");
  std::vector<QuantileTable<double>> tables;
  for (Index k = 0; k < K; ++k) {
    std::vector<double> col(static_cast<size_t>(J));
    for (Index i = 0; i < J; ++i) col[size_t(i)] = q.rows[size_t(i)].at(size_t(k));
    tables.emplace_back(std::move(col));
  }

  return KlmcModel<double>{parse_functional(get("functional")),
                           params,
                           J,
                           std::stoull(get("seed")),
                           get("kernel") == "analytic",
                           DiscretePath<double>(grid, std::move(mean)),
                           lambda,
                           Basis<double>(grid, std::move(F), BasisFamily::empirical_kl,
                                         InnerProduct::l2, "k = 1..K by decreasing eigenvalue",
                                         lambda),
                           std::move(tables)};
}

}  // namespace klmc::io
