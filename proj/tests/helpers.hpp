#pragma once

#include <cmath>
#include <random>

#include "nsfd/grid.hpp"

namespace testing {

using nsfd::GridFunction;
using nsfd::GridPtr;
using nsfd::Matrix;
using nsfd::Point;
using nsfd::Vector;

/// Uniform values on every mesh node and every valid ghost.
inline GridFunction random_extended(const GridPtr& grid, std::mt19937_64& rng, double lo = -1.0,
                                    double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  GridFunction u(grid);
  for (std::size_t f = 0; f < grid->extended_count(); ++f) {
    const auto c = grid->classify_flat(f);
    if (c != nsfd::NodeClass::ExcludedGhost) u.set(f, dist(rng));
  }
  return u;
}

/// Random quadratic q(x) = x^T H x / 2 + g.x + c with its exact derivatives.
struct Quadratic {
  Matrix hess;
  Vector grad;
  double c = 0.0;

  double operator()(const Point& x) const { return 0.5 * x.dot(hess * x) + grad.dot(x) + c; }
  Vector gradient(const Point& x) const { return hess * x + grad; }
};

inline Quadratic random_quadratic(std::size_t d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  Quadratic q;
  q.hess = Matrix(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) q.hess(i, j) = q.hess(j, i) = dist(rng);
  q.grad = Vector(d);
  for (std::size_t i = 0; i < d; ++i) q.grad[i] = dist(rng);
  q.c = dist(rng);
  return q;
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

}  // namespace testing
