#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nsfd/grid.hpp"
#include "nsfd/solver.hpp"

namespace nsfd {

struct ConvergenceRow {
  double h = 0.0;  // h_max, or the cell diagonal under HConvention::Diagonal
  double error_linf = 0.0;
  std::optional<double> order;

  // Not part of the emitted table.
  std::vector<int> sizes;
  bool converged = true;
  int iterations = 0;
  double final_residual = 0.0;
  StabilityDiagnostics diagnostics;
  double seconds = 0.0;
};

enum class OutputFormat { Csv, Markdown };

/// Which mesh size the h column reports. Max is h_max; Diagonal is the cell
/// diagonal sqrt(sum h_i^2), the convention of the reference tables.
enum class HConvention { Max, Diagonal };

struct RunConfig {
  std::string problem = "test1";
  std::vector<std::vector<int>> grid_sizes;
  double gamma = 4.0;
  double beta = 0.0;
  SolverConfig solver;
  std::optional<std::pair<int, int>> control_sampling;  // (n_phi, n_rot)
  OutputFormat format = OutputFormat::Csv;
  std::string out_path = "-";
  HConvention h_convention = HConvention::Max;
  bool finest_unlock = false;
  bool parallel = false;

  /// Largest J per axis allowed without finest_unlock.
  static constexpr int kDeskCap = 65;

  /// Grid sizes strictly refining, within the desk cap, at least 2 nodes per axis.
  void validate() const;
};

/// Solves on every grid from a zero initial guess. Nonconvergence flags the
/// row (converged = false) and the run continues.
std::vector<ConvergenceRow> run_convergence(const RunConfig& cfg);

/// ln(e_coarse/e_fine) / ln(h_coarse/h_fine). Throws ContractError for
/// nonpositive inputs or equal h.
double compute_order(double e_coarse, double e_fine, double h_coarse, double h_fine);

/// Fills row.order for every row after the first.
void fill_orders(std::vector<ConvergenceRow>& rows);

struct NormReport {
  double linf = 0.0;         // over mesh nodes
  double weighted_l2 = 0.0;  // (prod h_i^{1/2}) ||E||_{l2(interior)}
  std::vector<double> h2_diag;
};

/// Norms of E = U - u_ex. Ghost values of E are U's ghosts minus u_ex at the
/// ghost coordinates, so U must have its ghosts filled.
NormReport norms(const GridFunction& u, const std::function<double(const Point&)>& u_ex);

/// CSV: header h,error_linf,order; three significant digits (%.2e) for h and
/// error, %.2f for order, empty order on the first row.
/// Markdown: a pipe table with columns h | Error | Order.
std::string format_rows(const std::vector<ConvergenceRow>& rows, OutputFormat format);

/// Writes format_rows to path ("-" is stdout). Throws IoError when the path
/// cannot be written.
void emit(const std::vector<ConvergenceRow>& rows, OutputFormat format, const std::string& path);

/// "40,60" (square grids) or "40x30,80x60" (per axis). Throws ConfigError.
std::vector<std::vector<int>> parse_grids(const std::string& text, int dim);

/// Grid sizes used when none are given, all within the desk cap.
std::vector<std::vector<int>> default_grids(const std::string& problem);

/// J such that the cell diagonal sqrt(d) * length / (J - 1) matches a
/// reference h: round(sqrt(d) * length / h) + 1.
int grid_size_from_diagonal_h(double h, double length, int dim);

SolverConfig::Method parse_method(const std::string& name);
OutputFormat parse_format(const std::string& name);
HConvention parse_h_convention(const std::string& name);

}  // namespace nsfd
