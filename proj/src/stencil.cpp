#include "nsfd/stencil.hpp"

#include <string>

namespace nsfd {

namespace {

// Flat index of idx shifted by k steps along axis, bounds-checked against the
// extended box so a shift can never wrap into a different row.
std::size_t shift(const GridSpec& g, std::size_t idx, int axis, int k) {
  const int c = g.component(idx, axis) + k;
  if (c < 0 || c > g.sizes()[axis] + 1)
    throw StencilDataError("stencil leaves the extended mesh along axis " + std::to_string(axis));
  return static_cast<std::size_t>(static_cast<std::ptrdiff_t>(idx) + k * g.stride(axis));
}

std::size_t shift2(const GridSpec& g, std::size_t idx, int i, int ki, int j, int kj) {
  return shift(g, shift(g, idx, i, ki), j, kj);
}

void check_mixed(int i, int j) {
  if (i == j) throw ContractError("mixed operator needs distinct axes; use second_diff for i == j");
}

}  // namespace

double diff_sided(const GridFunction& u, std::size_t idx, int axis, Side side) {
  const GridSpec& g = u.grid();
  const double h = g.spacing(axis);
  if (side == Side::Forward) return (u.at(shift(g, idx, axis, 1)) - u.at(idx)) / h;
  return (u.at(idx) - u.at(shift(g, idx, axis, -1))) / h;
}

double second_diff(const GridFunction& u, std::size_t idx, int axis, Width width) {
  const GridSpec& g = u.grid();
  const int k = width == Width::H ? 1 : 2;
  const double h = g.spacing(axis) * k;
  return (u.at(shift(g, idx, axis, k)) - 2.0 * u.at(idx) + u.at(shift(g, idx, axis, -k))) / (h * h);
}

double tilde_diagonal(const GridFunction& u, std::size_t idx, int axis) {
  const GridSpec& g = u.grid();
  const double h = g.spacing(axis);
  const double sum = u.at(shift(g, idx, axis, -2)) - 2.0 * u.at(shift(g, idx, axis, -1)) +
                     2.0 * u.at(idx) - 2.0 * u.at(shift(g, idx, axis, 1)) +
                     u.at(shift(g, idx, axis, 2));
  return sum / (2.0 * h * h);
}

double mixed_second(const GridFunction& u, std::size_t idx, int i, int j, MixedFlavor flavor) {
  check_mixed(i, j);
  const GridSpec& g = u.grid();
  const double hh = g.spacing(i) * g.spacing(j);
  const double v0 = u.at(idx);
  switch (flavor) {
    case MixedFlavor::Hat: {
      const double pm = u.at(shift2(g, idx, i, 1, j, -1));
      const double mp = u.at(shift2(g, idx, i, -1, j, 1));
      const double pi = u.at(shift(g, idx, i, 1));
      const double mi = u.at(shift(g, idx, i, -1));
      const double pj = u.at(shift(g, idx, j, 1));
      const double mj = u.at(shift(g, idx, j, -1));
      return -(pm - pi - (mj - v0)) / (2.0 * hh) - (mp - mi - (pj - v0)) / (2.0 * hh);
    }
    case MixedFlavor::Tilde: {
      const double pp = u.at(shift2(g, idx, i, 1, j, 1));
      const double mm = u.at(shift2(g, idx, i, -1, j, -1));
      const double pi = u.at(shift(g, idx, i, 1));
      const double mi = u.at(shift(g, idx, i, -1));
      const double pj = u.at(shift(g, idx, j, 1));
      const double mj = u.at(shift(g, idx, j, -1));
      return (pp - pi - (pj - v0)) / (2.0 * hh) + (mm - mi - (mj - v0)) / (2.0 * hh);
    }
    case MixedFlavor::Bar: {
      const double pp = u.at(shift2(g, idx, i, 1, j, 1));
      const double mm = u.at(shift2(g, idx, i, -1, j, -1));
      const double mp = u.at(shift2(g, idx, i, -1, j, 1));
      const double pm = u.at(shift2(g, idx, i, 1, j, -1));
      return (pp + mm) / (4.0 * hh) - (mp + pm) / (4.0 * hh);
    }
  }
  return 0.0;
}

double diag_second(const GridFunction& u, std::size_t idx, int i, int j, Diagonal direction) {
  check_mixed(i, j);
  const GridSpec& g = u.grid();
  const double hi = g.spacing(i);
  const double hj = g.spacing(j);
  const int sj = direction == Diagonal::Eta ? 1 : -1;
  const double a = u.at(shift2(g, idx, i, 1, j, sj));
  const double b = u.at(shift2(g, idx, i, -1, j, -sj));
  return (a - 2.0 * u.at(idx) + b) / (hi * hi + hj * hj);
}

double sided_hessian(const GridFunction& u, std::size_t idx, int i, int j, Side mu, Side nu) {
  // delta^nu_{x_j} applied to the grid function delta^mu_{x_i} U.
  const GridSpec& g = u.grid();
  const double hj = g.spacing(j);
  if (nu == Side::Forward)
    return (diff_sided(u, shift(g, idx, j, 1), i, mu) - diff_sided(u, idx, i, mu)) / hj;
  return (diff_sided(u, idx, i, mu) - diff_sided(u, shift(g, idx, j, -1), i, mu)) / hj;
}

DiscreteGradients gradients(const GridFunction& u, std::size_t idx) {
  const auto d = static_cast<Eigen::Index>(u.grid().dim());
  DiscreteGradients out{Vector(d), Vector(d), Vector(d)};
  for (Eigen::Index i = 0; i < d; ++i) {
    out.forward[i] = diff_sided(u, idx, static_cast<int>(i), Side::Forward);
    out.backward[i] = diff_sided(u, idx, static_cast<int>(i), Side::Backward);
    out.central[i] = 0.5 * (out.forward[i] + out.backward[i]);
  }
  return out;
}

DiscreteHessians hessians(const GridFunction& u, std::size_t idx) {
  const auto d = static_cast<Eigen::Index>(u.grid().dim());
  DiscreteHessians out{Matrix(d, d), Matrix(d, d), Matrix(d, d), Matrix(d, d)};
  for (Eigen::Index i = 0; i < d; ++i) {
    const int ai = static_cast<int>(i);
    const double hat = second_diff(u, idx, ai, Width::H);
    const double tilde = tilde_diagonal(u, idx, ai);
    out.hat(i, i) = hat;
    out.tilde(i, i) = tilde;
    out.bar(i, i) = second_diff(u, idx, ai, Width::TwoH);
    out.standard(i, i) = hat;
    for (Eigen::Index j = i + 1; j < d; ++j) {
      const int aj = static_cast<int>(j);
      const double mh = mixed_second(u, idx, ai, aj, MixedFlavor::Hat);
      const double mt = mixed_second(u, idx, ai, aj, MixedFlavor::Tilde);
      const double mb = mixed_second(u, idx, ai, aj, MixedFlavor::Bar);
      out.hat(i, j) = out.hat(j, i) = mh;
      out.tilde(i, j) = out.tilde(j, i) = mt;
      out.bar(i, j) = out.bar(j, i) = mb;
      out.standard(i, j) = out.standard(j, i) = mb;
    }
  }
  return out;
}

Matrix moment_difference(const GridFunction& u, std::size_t idx) {
  const DiscreteHessians hs = hessians(u, idx);
  return hs.tilde - hs.hat;
}

}  // namespace nsfd
