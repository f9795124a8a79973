#ifndef KLMC_IO_HPP_
#define KLMC_IO_HPP_

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "klmc/pricing.hpp"
#include "klmc/signature.hpp"

namespace klmc::io {

/// Shortest decimal text that parses back to exactly `v`.
std::string format_number(double v);

/// Plain numeric CSV: optional header line plus rows of numbers.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

CsvTable read_numeric_csv(const std::filesystem::path& file, bool has_header);

/// Header = node times t_0..t_N, one row per path.
void write_ensemble_csv(const std::filesystem::path& file, const PathEnsemble<double>& ensemble);
PathEnsemble<double> read_ensemble_csv(const std::filesystem::path& file);

/// First row = node times, then one row per basis function.
void write_basis_csv(const std::filesystem::path& file, const Basis<double>& basis);

/// Header "lambda,<nodes>", then one row per pair: lambda_k, F_k(t_0..t_N).
void write_eigen_csv(const std::filesystem::path& file, const Vector<double>& eigenvalues,
                     const Basis<double>& functions);

/// `word,value` rows.
void write_word_csv(const std::filesystem::path& file, const std::map<Word, double>& values);

/// Cross-tab with header `m\tau,<maturities>`; companion file gets the
/// standard errors.
void write_surface_csv(const std::filesystem::path& prices_file,
                       const std::filesystem::path& errors_file,
                       const PriceSurface<double>& surface);

/// Model directory: meta, mean.csv, eigen.csv, quantiles.csv.
void save_model(const std::filesystem::path& dir, const KlmcModel<double>& model);
KlmcModel<double> load_model(const std::filesystem::path& dir);

}  // namespace klmc::io

#endif  // KLMC_IO_HPP_
