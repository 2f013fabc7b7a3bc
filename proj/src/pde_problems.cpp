#include "nsfd/pde_problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace nsfd {

namespace {

constexpr double kPi = std::numbers::pi;

double frobenius(const Matrix& a, const Matrix& m) { return (a.array() * m.array()).sum(); }

Control constant_control(Matrix a, double c, double s, std::string label) {
  const auto d = a.rows();
  return Control{MatrixField::of(std::move(a)), VectorField::of(Vector(Vector::Zero(d))),
                 ScalarField::of(c), ScalarField::of(s), std::move(label)};
}

Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

}  // namespace

double signed_pow(double x, double p) {
  if (x == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(x), p), x);
}

namespace {

double control_value(const Control& ctl, const Matrix& hessian, const Vector& gradient, double u,
                     const Point& x) {
  double v = ctl.A.is_constant() ? frobenius(ctl.A.constant, hessian) : frobenius(ctl.A(x), hessian);
  if (ctl.b.is_constant()) {
    if (ctl.b.constant.size() != 0) v += ctl.b.constant.dot(gradient);
  } else {
    v += ctl.b(x).dot(gradient);
  }
  return v + ctl.c(x) * u - ctl.s(x);
}

}  // namespace

double hjb_eval_control(const ControlSet& controls, std::size_t k, const Matrix& hessian,
                        const Vector& gradient, double u, const Point& x) {
  if (k >= controls.controls.size()) throw ContractError("control index out of range");
  return control_value(controls.controls[k], hessian, gradient, u, x) - controls.shared_forcing(x);
}

HjbValue hjb_eval(const ControlSet& controls, const Matrix& hessian, const Vector& gradient,
                  double u, const Point& x) {
  if (controls.controls.empty()) throw ContractError("HJB evaluation over an empty control set");
  double best = std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t k = 0; k < controls.controls.size(); ++k) {
    const double v = control_value(controls.controls[k], hessian, gradient, u, x);
    if (v < best) {
      best = v;
      arg = k;
    }
  }
  return {best - controls.shared_forcing(x), arg};
}

EllipticityData hjb_ellipticity(const ControlSet& controls, const std::vector<Point>& samples) {
  EllipticityData e;
  double k0 = std::numeric_limits<double>::infinity();
  double kss = std::numeric_limits<double>::infinity();
  double lam = std::numeric_limits<double>::infinity();
  for (const Point& x : samples) {
    for (const Control& ctl : controls.controls) {
      const Matrix a = ctl.A(x);
      const Vector b = ctl.b(x);
      const double c = ctl.c(x);
      k0 = std::min(k0, c);
      e.K0 = std::max(e.K0, c);
      for (Eigen::Index i = 0; i < a.rows(); ++i) {
        kss = std::min(kss, -a(i, i));
        for (Eigen::Index j = 0; j < a.cols(); ++j) e.K_ss = std::max(e.K_ss, std::abs(a(i, j)));
      }
      for (Eigen::Index i = 0; i < b.size(); ++i) e.K_s = std::max(e.K_s, std::abs(b[i]));
      Eigen::SelfAdjointEigenSolver<Matrix> eig(-0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
      lam = std::min(lam, eig.eigenvalues().minCoeff());
      e.Lambda = std::max(e.Lambda, eig.eigenvalues().maxCoeff());
    }
  }
  e.k0 = std::max(0.0, k0);
  e.k_ss = std::max(0.0, kss);
  // Round-off level eigenvalues count as degenerate.
  e.lambda = lam > 1e-12 * std::max(1.0, e.Lambda) ? lam : 0.0;
  return e;
}

PdeOperator make_hjb_operator(std::shared_ptr<const ControlSet> controls,
                              EllipticityData ellipticity) {
  const int d = controls->dimension;
  PdeOperator::Branches branches{
      [set = controls](const Matrix& m, const Vector& p, double u, const Point& x) {
        return static_cast<int>(hjb_eval(*set, m, p, u, x).argmin);
      },
      [set = controls](const Matrix& m, const Vector& p, double u, const Point& x, int k) {
        return hjb_eval_control(*set, static_cast<std::size_t>(k), m, p, u, x);
      }};
  return PdeOperator(
      d, ellipticity,
      [set = controls](const Matrix& m, const Vector& p, double u, const Point& x) {
        return hjb_eval(*set, m, p, u, x).value;
      },
      std::move(branches));
}

ScalarField manufactured_rhs(const ControlSet& controls, const ExactSolution& exact) {
  ControlSet unforced = controls;
  unforced.shared_forcing = ScalarField::of(0.0);
  auto set = std::make_shared<const ControlSet>(std::move(unforced));
  return ScalarField::of(std::function<double(const Point&)>([set, exact](const Point& x) {
    return hjb_eval(*set, exact.hessian(x), exact.gradient(x), exact.value(x), x).value;
  }));
}

ManufacturedProblem make_test1() {
  ControlSet set;
  set.kind = ControlSet::Kind::Finite;
  set.dimension = 2;
  // The eighth matrix repeats the fourth.
  const Matrix list[] = {
      mat2(-1, 1, 1, -1),   mat2(-2, 1, 1, -1),   mat2(-1, -1, -1, -1), mat2(-1, -1, -1, -2),
      mat2(-2, 1, 1, -2),   mat2(-2, -1, -1, -2), mat2(-2, -1, -1, -1), mat2(-1, -1, -1, -2),
  };
  for (std::size_t k = 0; k < std::size(list); ++k)
    set.controls.push_back(constant_control(list[k], 0.0, 0.0, "A" + std::to_string(k + 1)));

  ExactSolution ex;
  const double a = 2.0 * kPi * 1.2;
  const double b = 2.0 * kPi;
  ex.value = [](const Point& x) { return std::sin(2.0 * kPi * (1.2 * x[0] - x[1])); };
  ex.gradient = [a, b](const Point& x) {
    const double c = std::cos(2.0 * kPi * (1.2 * x[0] - x[1]));
    Vector g(2);
    g << a * c, -b * c;
    return g;
  };
  ex.hessian = [a, b](const Point& x) {
    const double s = std::sin(2.0 * kPi * (1.2 * x[0] - x[1]));
    return mat2(-a * a * s, a * b * s, a * b * s, -b * b * s);
  };
  set.shared_forcing = manufactured_rhs(set, ex);

  const EllipticityData ell = hjb_ellipticity(set, {Point::Zero(2)});
  auto shared = std::make_shared<const ControlSet>(std::move(set));
  return ManufacturedProblem{"test1", DomainBox::unit(2), make_hjb_operator(shared, ell),
                             ex.value, ex, shared};
}

Matrix test2_sigma(double phi, double psi) {
  Matrix r = mat2(std::cos(psi), -std::sin(psi), std::sin(psi), std::cos(psi));
  return r.transpose() * mat2(1.0, std::sin(phi), 0.0, std::cos(phi));
}

ManufacturedProblem make_test2(int n_phi, int n_rot) {
  if (n_phi < 1 || n_rot < 1) throw ConfigError("test2 needs n_phi >= 1 and n_rot >= 1");
  ControlSet set;
  set.kind = ControlSet::Kind::Sampled;
  set.dimension = 2;
  set.lattice = ControlLattice{{"phi", "rotation"}, {0.0, 0.0}, {kPi / 3.0, 2.0 * kPi}, {n_phi, n_rot}};
  const double pi2 = kPi * kPi;
  for (int k = 0; k < n_phi; ++k) {
    const double phi = n_phi == 1 ? 0.0 : (kPi / 3.0) * k / (n_phi - 1);
    const double s = std::sqrt(3.0) * std::pow(std::sin(phi / pi2), 2);
    for (int m = 0; m < n_rot; ++m) {
      const double psi = 2.0 * kPi * m / n_rot;
      const Matrix sigma = test2_sigma(phi, psi);
      // Negative semidefinite diffusion, matching the min-convention HJB.
      Matrix a = -0.5 * sigma * sigma.transpose();
      set.controls.push_back(constant_control(std::move(a), pi2, s,
                                              "phi" + std::to_string(k) + "_rot" + std::to_string(m)));
    }
  }

  ExactSolution ex;
  ex.value = [](const Point& x) {
    return std::exp(x[0] * x[1]) * std::sin(kPi * x[0]) * std::sin(kPi * x[1]);
  };
  ex.gradient = [](const Point& x) {
    const double e = std::exp(x[0] * x[1]);
    const double s1 = std::sin(kPi * x[0]), c1 = std::cos(kPi * x[0]);
    const double s2 = std::sin(kPi * x[1]), c2 = std::cos(kPi * x[1]);
    Vector g(2);
    g << e * (x[1] * s1 * s2 + kPi * c1 * s2), e * (x[0] * s1 * s2 + kPi * s1 * c2);
    return g;
  };
  ex.hessian = [](const Point& x) {
    const double X = x[0], Y = x[1];
    const double e = std::exp(X * Y);
    const double s1 = std::sin(kPi * X), c1 = std::cos(kPi * X);
    const double s2 = std::sin(kPi * Y), c2 = std::cos(kPi * Y);
    const double uxx = e * (Y * Y * s1 * s2 + 2.0 * kPi * Y * c1 * s2 - kPi * kPi * s1 * s2);
    const double uyy = e * (X * X * s1 * s2 + 2.0 * kPi * X * s1 * c2 - kPi * kPi * s1 * s2);
    const double uxy = e * (X * Y * s1 * s2 + kPi * X * c1 * s2 + s1 * s2 + kPi * Y * s1 * c2 +
                            kPi * kPi * c1 * c2);
    return mat2(uxx, uxy, uxy, uyy);
  };
  set.shared_forcing = manufactured_rhs(set, ex);

  const EllipticityData ell = hjb_ellipticity(set, {Point::Zero(2)});
  auto shared = std::make_shared<const ControlSet>(std::move(set));
  return ManufacturedProblem{"test2", DomainBox::unit(2), make_hjb_operator(shared, ell),
                             ex.value, ex, shared};
}

ManufacturedProblem make_test3() {
  // A(x,y) = (16/9) [[x^{2/3}, -x^{1/3} y^{1/3}], [-x^{1/3} y^{1/3}, y^{2/3}]] is
  // positive semidefinite and rank one; the operator is written as
  // -A : D^2u + f so that it is nonincreasing in the Hessian.
  auto diffusion = [](const Point& x) {
    const double cx = signed_pow(x[0], 1.0 / 3.0);
    const double cy = signed_pow(x[1], 1.0 / 3.0);
    return Matrix((16.0 / 9.0) * mat2(cx * cx, -cx * cy, -cx * cy, cy * cy));
  };

  ControlSet set;
  set.kind = ControlSet::Kind::Finite;
  set.dimension = 2;
  set.controls.push_back(Control{
      MatrixField::of(std::function<Matrix(const Point&)>(
          [diffusion](const Point& x) { return Matrix(-diffusion(x)); })),
      VectorField::of(Vector(Vector::Zero(2))), ScalarField::of(0.0), ScalarField::of(0.0), "A(x,y)"});
  // A : D^2 u_ex = (16/9)(4/9)(1 - 1) = 0 wherever it is defined.
  set.shared_forcing = ScalarField::of(0.0);

  ExactSolution ex;
  ex.value = [](const Point& x) {
    return std::pow(std::abs(x[0]), 4.0 / 3.0) - std::pow(std::abs(x[1]), 4.0 / 3.0);
  };
  ex.gradient = [](const Point& x) {
    Vector g(2);
    g << (4.0 / 3.0) * signed_pow(x[0], 1.0 / 3.0), -(4.0 / 3.0) * signed_pow(x[1], 1.0 / 3.0);
    return g;
  };
  ex.hessian = [](const Point& x) {
    return mat2((4.0 / 9.0) * std::pow(std::abs(x[0]), -2.0 / 3.0), 0.0, 0.0,
                -(4.0 / 9.0) * std::pow(std::abs(x[1]), -2.0 / 3.0));
  };

  std::vector<Point> corners;
  for (double a : {-0.5, 0.5})
    for (double b : {-0.5, 0.5}) {
      Point p(2);
      p << a, b;
      corners.push_back(p);
    }
  const EllipticityData ell = hjb_ellipticity(set, corners);
  auto shared = std::make_shared<const ControlSet>(std::move(set));
  DomainBox box{{-0.5, -0.5}, {0.5, 0.5}};
  return ManufacturedProblem{"test3", box, make_hjb_operator(shared, ell), ex.value, ex, shared};
}

ManufacturedProblem make_problem(const std::string& name, const ProblemOptions& options) {
  if (name == "test1") return make_test1();
  if (name == "test2") return make_test2(options.n_phi, options.n_rot);
  if (name == "test3") return make_test3();
  throw ConfigError("unknown problem '" + name + "' (expected test1, test2 or test3)");
}

}  // namespace nsfd
