#include "nsfd/convergence.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <limits>
#include <sstream>

#include "nsfd/pde_problems.hpp"
#include "nsfd/stencil.hpp"

namespace nsfd {

namespace {

double max_spacing(const DomainBox& box, const std::vector<int>& sizes) {
  double h = 0.0;
  for (std::size_t i = 0; i < sizes.size(); ++i)
    h = std::max(h, (box.upper[i] - box.lower[i]) / (sizes[i] - 1));
  return h;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

int parse_positive_int(const std::string& s) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("bad grid size '" + s + "'");
  }
  if (used != s.size() || v < 2) throw ConfigError("bad grid size '" + s + "'");
  return v;
}

ConvergenceRow solve_row(const ManufacturedProblem& problem, const std::vector<int>& sizes,
                         const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const GridPtr grid = make_grid(problem.domain, sizes);
  ConvergenceRow row;
  row.sizes = sizes;
  if (cfg.h_convention == HConvention::Max) {
    row.h = grid->h_max();
  } else {
    double s = 0.0;
    for (double h : grid->spacings()) s += h * h;
    row.h = std::sqrt(s);
  }

  const SchemeParams params{cfg.gamma, cfg.beta};
  const GridFunction u0(grid);
  std::optional<GridFunction> solution;
  try {
    SolveReport rep = solve(u0, cfg.solver, params, problem.op, problem.boundary_g);
    row.converged = rep.converged;
    row.iterations = rep.iterations;
    row.final_residual = rep.final_residual;
    solution = std::move(rep.solution);
  } catch (const NonconvergenceError& e) {
    std::cerr << "warning: " << e.what() << '\n';
    row.converged = false;
    row.iterations = e.report().iterations;
    row.final_residual = e.report().final_residual;
    solution = e.report().solution;
  } catch (const Error& e) {
    std::cerr << "warning: " << e.what() << '\n';
    row.converged = false;
  }

  if (solution) {
    row.error_linf = norms(*solution, problem.exact_solution->value).linf;
    row.diagnostics = stability_diagnostics(*solution);
  } else {
    row.error_linf = std::numeric_limits<double>::quiet_NaN();
  }
  row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

}  // namespace

void RunConfig::validate() const {
  solver.validate();
  if (grid_sizes.empty()) throw ConfigError("no grid sizes given");
  if (gamma < 0.0 || beta < 0.0) throw ConfigError("gamma and beta must be nonnegative");
  const std::size_t d = grid_sizes.front().size();
  for (const auto& s : grid_sizes) {
    if (s.size() != d) throw ConfigError("grid sizes disagree on the dimension");
    for (int j : s) {
      if (j < 2) throw ConfigError("grid sizes need at least 2 nodes per axis");
      if (!finest_unlock && j > kDeskCap)
        throw ConfigError("grid size " + std::to_string(j) + " exceeds the desk cap of " +
                          std::to_string(kDeskCap) + "; pass --finest-unlock to allow it");
    }
  }
  const DomainBox unit = DomainBox::unit(d);
  for (std::size_t k = 1; k < grid_sizes.size(); ++k) {
    if (!(max_spacing(unit, grid_sizes[k]) < max_spacing(unit, grid_sizes[k - 1])))
      throw ConfigError("grid sizes must be strictly refining");
  }
}

double compute_order(double e_coarse, double e_fine, double h_coarse, double h_fine) {
  if (!(e_coarse > 0.0 && e_fine > 0.0 && h_coarse > 0.0 && h_fine > 0.0))
    throw ContractError("compute_order needs positive errors and mesh sizes");
  if (h_coarse == h_fine) throw ContractError("compute_order needs distinct mesh sizes");
  return std::log(e_coarse / e_fine) / std::log(h_coarse / h_fine);
}

void fill_orders(std::vector<ConvergenceRow>& rows) {
  for (std::size_t k = 0; k < rows.size(); ++k) {
    rows[k].order.reset();
    if (k == 0) continue;
    const auto& a = rows[k - 1];
    const auto& b = rows[k];
    if (a.error_linf > 0.0 && b.error_linf > 0.0 && std::isfinite(a.error_linf) &&
        std::isfinite(b.error_linf))
      rows[k].order = compute_order(a.error_linf, b.error_linf, a.h, b.h);
    else
      rows[k].order = std::numeric_limits<double>::quiet_NaN();
  }
}

std::vector<ConvergenceRow> run_convergence(const RunConfig& cfg) {
  cfg.validate();
  ProblemOptions opts;
  if (cfg.control_sampling) {
    opts.n_phi = cfg.control_sampling->first;
    opts.n_rot = cfg.control_sampling->second;
  }
  const ManufacturedProblem problem = make_problem(cfg.problem, opts);
  if (!problem.exact_solution) throw ConfigError("problem " + cfg.problem + " has no exact solution");
  if (cfg.grid_sizes.front().size() != problem.domain.dim())
    throw ConfigError("grid dimension does not match the problem");

  std::vector<ConvergenceRow> rows;
  if (cfg.parallel) {
    std::vector<std::future<ConvergenceRow>> jobs;
    for (const auto& s : cfg.grid_sizes)
      jobs.push_back(std::async(std::launch::async, [&problem, &cfg, s] { return solve_row(problem, s, cfg); }));
    for (auto& j : jobs) rows.push_back(j.get());
  } else {
    for (const auto& s : cfg.grid_sizes) rows.push_back(solve_row(problem, s, cfg));
  }
  fill_orders(rows);
  return rows;
}

NormReport norms(const GridFunction& u, const std::function<double(const Point&)>& u_ex) {
  const GridSpec& grid = u.grid();
  const int d = static_cast<int>(grid.dim());
  GridFunction err(u.grid_ptr());
  NormReport out;
  for (std::size_t f = 0; f < grid.extended_count(); ++f) {
    if (!u.is_set(f)) continue;
    const double e = u.at(f) - u_ex(grid.coord_flat(f));
    err.set(f, e);
    if (grid.is_mesh_node(f)) out.linf = std::max(out.linf, std::abs(e));
  }
  double weight = 1.0;
  for (int i = 0; i < d; ++i) weight *= std::sqrt(grid.spacing(i));
  double sum = 0.0;
  out.h2_diag.assign(static_cast<std::size_t>(d), 0.0);
  for (std::size_t f : grid.interior_nodes()) {
    const double e = err.at(f);
    sum += e * e;
    for (int i = 0; i < d; ++i) {
      const double s = second_diff(err, f, i, Width::TwoH);
      out.h2_diag[static_cast<std::size_t>(i)] += s * s;
    }
  }
  out.weighted_l2 = weight * std::sqrt(sum);
  for (double& s : out.h2_diag) s = weight * std::sqrt(s);
  return out;
}

std::string format_rows(const std::vector<ConvergenceRow>& rows, OutputFormat format) {
  std::ostringstream os;
  char buf[64];
  auto sci = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.2e", v);
    return std::string(buf);
  };
  auto fixed = [&](const std::optional<double>& v) {
    if (!v) return std::string();
    std::snprintf(buf, sizeof buf, "%.2f", *v);
    return std::string(buf);
  };
  if (format == OutputFormat::Csv) {
    os << "h,error_linf,order\n";
    for (const auto& r : rows) os << sci(r.h) << ',' << sci(r.error_linf) << ',' << fixed(r.order) << '\n';
  } else {
    os << "| h | Error | Order |\n|---|---|---|\n";
    for (const auto& r : rows)
      os << "| " << sci(r.h) << " | " << sci(r.error_linf) << " | " << fixed(r.order) << " |\n";
  }
  return os.str();
}

void emit(const std::vector<ConvergenceRow>& rows, OutputFormat format, const std::string& path) {
  const std::string text = format_rows(rows, format);
  if (path == "-") {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing " + path);
}

std::vector<std::vector<int>> parse_grids(const std::string& text, int dim) {
  std::vector<std::vector<int>> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError("empty entry in grid list '" + text + "'");
    std::vector<int> sizes;
    std::stringstream parts(item);
    std::string p;
    while (std::getline(parts, p, 'x')) sizes.push_back(parse_positive_int(trim(p)));
    if (sizes.size() == 1) sizes.assign(static_cast<std::size_t>(dim), sizes.front());
    if (static_cast<int>(sizes.size()) != dim)
      throw ConfigError("grid '" + item + "' does not have " + std::to_string(dim) + " sizes");
    out.push_back(std::move(sizes));
  }
  if (out.empty()) throw ConfigError("empty grid list");
  return out;
}

std::vector<std::vector<int>> default_grids(const std::string& problem) {
  std::vector<int> js;
  if (problem == "test1") js = {40, 60};
  else if (problem == "test2") js = {16, 24, 32, 40, 50};
  else if (problem == "test3") js = {24, 32, 40, 50, 64};
  else throw ConfigError("unknown problem '" + problem + "'");
  std::vector<std::vector<int>> out;
  for (int j : js) out.push_back({j, j});
  return out;
}

int grid_size_from_diagonal_h(double h, double length, int dim) {
  if (!(h > 0.0) || !(length > 0.0) || dim < 1) throw ContractError("bad arguments for grid size");
  return static_cast<int>(std::lround(std::sqrt(static_cast<double>(dim)) * length / h)) + 1;
}

SolverConfig::Method parse_method(const std::string& name) {
  if (name == "euler") return SolverConfig::Method::Euler;
  if (name == "newton") return SolverConfig::Method::Newton;
  if (name == "newton-fallback") return SolverConfig::Method::NewtonWithEulerFallback;
  throw ConfigError("unknown solver '" + name + "' (euler, newton, newton-fallback)");
}

OutputFormat parse_format(const std::string& name) {
  if (name == "csv") return OutputFormat::Csv;
  if (name == "markdown" || name == "md") return OutputFormat::Markdown;
  throw ConfigError("unknown format '" + name + "' (csv, markdown)");
}

HConvention parse_h_convention(const std::string& name) {
  if (name == "max") return HConvention::Max;
  if (name == "diagonal") return HConvention::Diagonal;
  throw ConfigError("unknown h convention '" + name + "' (max, diagonal)");
}

}  // namespace nsfd
