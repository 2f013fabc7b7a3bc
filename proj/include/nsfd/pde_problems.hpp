#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nsfd/grid.hpp"

namespace nsfd {

/// Bounds on the partial derivatives of F, named after their role:
///   k0 <= dF/du <= K0
///   k_ss = min_i k_ii with -K_ii <= dF/du_{x_i x_i} <= -k_ii
///   K_ss = max_{i,j} K_ij with |dF/du_{x_i x_j}| <= K_ij (diagonal included)
///   K_s  = max_i K_i with |dF/du_{x_i}| <= K_i
///   lambda, Lambda: uniform ellipticity bounds, zero when degenerate.
struct EllipticityData {
  double k0 = 0.0;
  double K0 = 0.0;
  double k_ss = 0.0;
  double K_ss = 0.0;
  double K_s = 0.0;
  double lambda = 0.0;
  double Lambda = 0.0;

  bool uniformly_elliptic() const { return lambda > 0.0; }
};

/// F(M, p, u, x) with its ellipticity metadata. Immutable and thread-safe.
///
/// Operators that are a min or max of smooth pieces (HJB) can also expose the
/// piece active at a point; Newton then differentiates with that piece held
/// fixed instead of differencing across a kink.
class PdeOperator {
 public:
  using Function = std::function<double(const Matrix& hessian, const Vector& gradient, double u,
                                        const Point& x)>;

  struct Branches {
    std::function<int(const Matrix&, const Vector&, double, const Point&)> select;
    std::function<double(const Matrix&, const Vector&, double, const Point&, int)> evaluate;
  };

  PdeOperator(int dimension, EllipticityData ellipticity, Function fn,
              std::optional<Branches> branches = std::nullopt)
      : dimension_(dimension),
        ellipticity_(ellipticity),
        fn_(std::move(fn)),
        branches_(std::move(branches)) {}

  double evaluate(const Matrix& hessian, const Vector& gradient, double u, const Point& x) const {
    return fn_(hessian, gradient, u, x);
  }

  bool has_branches() const { return branches_.has_value(); }
  /// Active piece at the given arguments; 0 when the operator has no pieces.
  int select_branch(const Matrix& hessian, const Vector& gradient, double u, const Point& x) const {
    return branches_ ? branches_->select(hessian, gradient, u, x) : 0;
  }
  /// The given piece; the full operator when there are no pieces.
  double evaluate_branch(const Matrix& hessian, const Vector& gradient, double u, const Point& x,
                         int branch) const {
    return branches_ ? branches_->evaluate(hessian, gradient, u, x, branch)
                     : fn_(hessian, gradient, u, x);
  }

  int dimension() const { return dimension_; }
  const EllipticityData& ellipticity() const { return ellipticity_; }

 private:
  int dimension_;
  EllipticityData ellipticity_;
  Function fn_;
  std::optional<Branches> branches_;
};

/// A coefficient that is either constant or a function of position.
template <class T>
struct Field {
  T constant{};
  std::function<T(const Point&)> fn;

  T operator()(const Point& x) const { return fn ? fn(x) : constant; }
  bool is_constant() const { return !fn; }

  static Field of(T value) { return Field{std::move(value), {}}; }
  static Field of(std::function<T(const Point&)> f) { return Field{T{}, std::move(f)}; }
};

using ScalarField = Field<double>;
using VectorField = Field<Vector>;
using MatrixField = Field<Matrix>;

/// One control theta: L_theta u = A : D^2u + b . grad u + c u, with forcing
/// f_theta = s_theta + g where g is shared by every control.
struct Control {
  MatrixField A;
  VectorField b;
  ScalarField c;
  ScalarField s;
  std::string label;
};

/// Parameter lattice a sampled control set was materialized from.
struct ControlLattice {
  std::vector<std::string> names;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<int> counts;
};

struct ControlSet {
  enum class Kind { Finite, Sampled };

  Kind kind = Kind::Finite;
  int dimension = 2;
  std::vector<Control> controls;
  ScalarField shared_forcing = ScalarField::of(0.0);
  std::optional<ControlLattice> lattice;
};

struct HjbValue {
  double value;
  std::size_t argmin;
};

/// min over the control list of A:M + b.p + c u - f_theta. Ties go to the
/// lowest index. Throws ContractError for an empty set.
HjbValue hjb_eval(const ControlSet& controls, const Matrix& hessian, const Vector& gradient,
                  double u, const Point& x);

/// The HJB expression for a single control k.
double hjb_eval_control(const ControlSet& controls, std::size_t k, const Matrix& hessian,
                        const Vector& gradient, double u, const Point& x);

/// Ellipticity bounds of the HJB operator, taken over every control and the
/// given sample points (a single point suffices for constant coefficients).
EllipticityData hjb_ellipticity(const ControlSet& controls, const std::vector<Point>& samples);

PdeOperator make_hjb_operator(std::shared_ptr<const ControlSet> controls,
                              EllipticityData ellipticity);

struct ExactSolution {
  std::function<double(const Point&)> value;
  std::function<Vector(const Point&)> gradient;
  std::function<Matrix(const Point&)> hessian;
};

struct ManufacturedProblem {
  std::string name;
  DomainBox domain;
  PdeOperator op;
  std::function<double(const Point&)> boundary_g;
  std::optional<ExactSolution> exact_solution;
  /// Present for HJB problems.
  std::shared_ptr<const ControlSet> controls;
};

/// g(x) = min_theta (L_theta u_ex(x) - s_theta(x)). Installing it as the
/// shared forcing makes u_ex an exact zero of the HJB operator.
ScalarField manufactured_rhs(const ControlSet& controls, const ExactSolution& exact);

/// Eight constant negative semidefinite controls on (0,1)^2, u = sin(2 pi (1.2x - y)).
ManufacturedProblem make_test1();

/// Controls sampled from [0, pi/3] x SO(2); u = e^{xy} sin(pi x) sin(pi y).
ManufacturedProblem make_test2(int n_phi = 8, int n_rot = 16);

/// Degenerate linear problem on (-0.5,0.5)^2 with u = x^{4/3} - y^{4/3}.
ManufacturedProblem make_test3();

/// sigma = R^T [[1, sin phi], [0, cos phi]] for R the rotation by psi.
Matrix test2_sigma(double phi, double psi);

/// Real signed power: sign(x) |x|^p.
double signed_pow(double x, double p);

struct ProblemOptions {
  int n_phi = 8;
  int n_rot = 16;
};

/// "test1", "test2" or "test3"; throws ConfigError otherwise.
ManufacturedProblem make_problem(const std::string& name, const ProblemOptions& options = {});

}  // namespace nsfd
