#pragma once

// P1 finite elements for the Robin problem on D = Omega \ closure(B):
//
//   -Delta_g u + p u = f            in D,
//   d_{nu_g} u + q u = a            on dD = S u Gamma,
//
// in weak form h(u, v) + p (u, v) = (f, v)_{dV_g} + (a, v)_{dS_g} with
// h(u, v) = int_D <grad_g u, grad_g v> dV_g + int_{dD} q u v dS_g.

#include "robinlab/boundary.hpp"
#include "robinlab/geometry.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>

namespace robinlab {

/// Coefficient or flux on one boundary component: a constant, a function of
/// the polar angle, or a nodal field interpolated linearly along edges.
class BoundaryFunction {
 public:
  BoundaryFunction() = default;  // identically zero

  static BoundaryFunction constant(double value);
  static BoundaryFunction angular(std::function<double(double)> f);
  static BoundaryFunction nodal(BoundaryField field);

  double at_node(const BoundaryLoop& loop, Index k) const;
  double at_gauss(const BoundaryLoop& loop, Index edge, int gp) const;
  BoundaryField on(const LoopPtr& loop) const;

  bool is_constant() const { return kind_ == Kind::Constant; }
  double constant_value() const { return value_; }
  /// Throws DomainError when a nodal field does not belong to `loop`.
  void check_loop(const BoundaryLoop& loop) const;

 private:
  enum class Kind { Constant, Angular, Nodal };
  Kind kind_ = Kind::Constant;
  double value_ = 0.0;
  std::function<double(double)> fn_;
  std::shared_ptr<const BoundaryField> field_;
};

struct RobinProblem {
  std::function<double(const Vec2&)> source;  // empty means f = 0
  BoundaryFunction q_S;
  BoundaryFunction q_Gamma;
  BoundaryFunction flux_S;
  BoundaryFunction flux_Gamma;
  double absorption = 0.0;  // constant p >= 0
  double kappa = std::numeric_limits<double>::infinity();  // sup-norm cap on q

  const BoundaryFunction& q(BoundaryTag tag) const { return tag == BoundaryTag::S ? q_S : q_Gamma; }
  const BoundaryFunction& flux(BoundaryTag tag) const {
    return tag == BoundaryTag::S ? flux_S : flux_Gamma;
  }
  double source_at(const Vec2& x) const { return source ? source(x) : 0.0; }

  /// Sign, cap and coercivity guards, checked at nodes and edge Gauss points.
  void validate(const Mesh& mesh) const;
};

/// A = stiffness + robin + absorption, all symmetric.
struct LinearSystem {
  Eigen::SparseMatrix<double> matrix;
  Eigen::SparseMatrix<double> stiffness;
  Eigen::SparseMatrix<double> robin;
  Eigen::SparseMatrix<double> absorption;
  Eigen::VectorXd rhs;
};

LinearSystem assemble(const RobinProblem& problem, const Mesh& mesh, const MetricTensor& metric);

/// Load vector of int_{loop} a phi_i dS_g for one boundary flux.
Eigen::VectorXd assemble_boundary_load(const Mesh& mesh, BoundaryTag tag, const BoundaryFunction& flux);

enum class SolveMethod {
  Auto,  // sparse Cholesky below 2000 unknowns, conjugate gradients above
  ConjugateGradient,
  Cholesky,
};

struct SolveResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients (or Cholesky) to a relative
/// residual tol in [1e-14, 1e-6]. CG stops with ConvergenceError after
/// 10 * n iterations.
SolveResult solve(const LinearSystem& system, double tol, SolveMethod method = SolveMethod::Auto);
SolveResult solve(const Eigen::SparseMatrix<double>& matrix, const Eigen::VectorXd& rhs, double tol,
                  SolveMethod method = SolveMethod::Auto);

/// Sparse Cholesky factorization reused for many right-hand sides.
class FactoredOperator {
 public:
  explicit FactoredOperator(const Eigen::SparseMatrix<double>& matrix);
  ~FactoredOperator();
  FactoredOperator(FactoredOperator&&) noexcept;
  FactoredOperator& operator=(FactoredOperator&&) noexcept;
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct ForwardSolution {
  Eigen::VectorXd nodal_values;
  BoundaryField trace_S;
  BoundaryField trace_Gamma;
  BoundaryField conormal_Gamma;  // a_Gamma - q_Gamma u on Gamma
  double energy = 0.0;  // h(u, u) + p |u|^2
  int iterations = 0;
  double relative_residual = 0.0;
};

struct ForwardOptions {
  double tol = 1e-12;
  SolveMethod method = SolveMethod::Auto;
};

/// validate + assemble + solve + boundary extraction.
ForwardSolution solve_forward(const RobinProblem& problem, const Mesh& mesh,
                              const MetricTensor& metric, const ForwardOptions& options = {});

/// Wraps nodal values already computed for `problem` into a ForwardSolution.
ForwardSolution make_solution(Eigen::VectorXd nodal, const RobinProblem& problem, const Mesh& mesh,
                              const MetricTensor& metric);

CauchyData extract_cauchy(const ForwardSolution& solution, const RobinProblem& problem);

/// h(u, u) + p int u^2 dV_g, evaluated element by element (independent of the
/// assembled matrix).
double energy_form(const Eigen::VectorXd& u, const RobinProblem& problem, const Mesh& mesh,
                   const MetricTensor& metric);
/// int_D f u dV_g + int_{dD} a u dS_g with the assembly quadrature.
double load_functional(const Eigen::VectorXd& u, const RobinProblem& problem, const Mesh& mesh);
/// |energy_form - load_functional| / |load_functional|.
double energy_identity_residual(const Eigen::VectorXd& u, const RobinProblem& problem,
                                const Mesh& mesh, const MetricTensor& metric);

/// Nodal restriction to a boundary loop.
BoundaryField restrict_to(const Eigen::VectorXd& u, const LoopPtr& loop);

/// |u|_{L2(D)} with dV_g weights (exact for P1 with sqrt|g| frozen per triangle).
double domain_l2_norm(const Eigen::VectorXd& u, const Mesh& mesh);
/// (|u|_{L2}^2 + |grad_g u|_{L2}^2)^{1/2}.
double domain_h1_norm(const Eigen::VectorXd& u, const Mesh& mesh, const MetricTensor& metric);
/// Euclidean L2(D) error against an exact field, 7-point triangle quadrature.
double l2_error(const Eigen::VectorXd& u, const std::function<double(const Vec2&)>& exact,
                const Mesh& mesh);
/// Euclidean H1 seminorm error against an exact gradient.
double h1_seminorm_error(const Eigen::VectorXd& u, const std::function<Vec2(const Vec2&)>& grad,
                         const Mesh& mesh);
/// Euclidean L2(D) norm of an exact field with the same quadrature.
double l2_norm_exact(const std::function<double(const Vec2&)>& exact, const Mesh& mesh);

}  // namespace robinlab
