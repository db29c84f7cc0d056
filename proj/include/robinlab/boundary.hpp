#pragma once

// Boundary-side analysis on the closed curves S and Gamma: nodal boundary
// fields, the Laplace-Beltrami eigenbasis of a loop, spectral Sobolev norms,
// tangential derivatives, the set A, the subspaces W_lambda and the Cauchy
// data functional C(w).

#include "robinlab/geometry.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>

namespace robinlab {

/// Scalar field sampled at the nodes of one boundary loop. Between nodes the
/// field is piecewise linear; the L2 inner product uses the trapezoidal dS_g
/// node weights of the loop.
class BoundaryField {
 public:
  BoundaryField(LoopPtr loop, Eigen::VectorXd values);

  static BoundaryField zeros(LoopPtr loop);
  static BoundaryField constant(LoopPtr loop, double value);
  /// Samples f(theta) at the node polar angles.
  static BoundaryField sample(LoopPtr loop, const std::function<double(double)>& f);

  BoundaryTag tag() const { return loop_->tag; }
  const BoundaryLoop& loop() const { return *loop_; }
  const LoopPtr& loop_ptr() const { return loop_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }
  double operator[](std::size_t k) const { return values_[static_cast<Eigen::Index>(k)]; }

  /// Linear interpolation along edge `edge` at Gauss point `gp`.
  double edge_value(Index edge, int gp) const;
  /// Periodic linear interpolation in polar angle.
  double at_angle(double theta) const;
  /// Same field on another loop, by periodic linear interpolation in angle.
  BoundaryField resample(LoopPtr target) const;

  double inner(const BoundaryField& other) const;
  double l2_norm() const;
  double min() const { return values_.minCoeff(); }
  double max() const { return values_.maxCoeff(); }

  BoundaryField& operator+=(const BoundaryField& other);
  BoundaryField& operator-=(const BoundaryField& other);
  BoundaryField& operator*=(double s);

 private:
  LoopPtr loop_;
  Eigen::VectorXd values_;
};

BoundaryField operator+(BoundaryField a, const BoundaryField& b);
BoundaryField operator-(BoundaryField a, const BoundaryField& b);
BoundaryField operator*(double s, BoundaryField a);
/// Pointwise product.
BoundaryField hadamard(const BoundaryField& a, const BoundaryField& b);

/// True when both loops discretize the same boundary with the same nodes.
bool same_discretization(const BoundaryLoop& a, const BoundaryLoop& b);

/// Laplace-Beltrami eigenpairs of a loop: -(d/ds)^2 phi = lambda phi in the
/// arc length induced by g, second-order periodic finite differences. Columns
/// of `functions` are orthonormal in the weighted L2 inner product.
struct EigenBasis {
  LoopPtr loop;
  Eigen::VectorXd eigenvalues;  // ascending, eigenvalues[0] == 0
  Eigen::MatrixXd functions;  // nodes x M

  std::size_t size() const { return static_cast<std::size_t>(eigenvalues.size()); }
  /// Number of eigenvalues lambda_m <= cutoff (with a relative slack of 1e-10).
  std::size_t count_up_to(double cutoff) const;
  BoundaryField function(std::size_t m) const;
  /// Weighted inner products (field, phi_m) for all m.
  Eigen::VectorXd coefficients(const BoundaryField& field) const;
  BoundaryField synthesize(const Eigen::VectorXd& coeffs) const;
};

/// lb_eigenbasis: first M eigenpairs; M must not exceed half the node count.
EigenBasis lb_eigenbasis(LoopPtr loop, std::size_t count);

/// Spectral H^t norm (sum_m (1 + lambda_m)^t |(f, phi_m)|^2)^{1/2}, t in [0, 1].
double sobolev_norm(const BoundaryField& field, double t, const EigenBasis& basis);

/// Edgewise-constant arc-length derivative (u_{k+1} - u_k) / l_k, per edge.
Eigen::VectorXd edge_derivatives(const BoundaryField& field);
/// L2 norm of the edgewise tangential derivative.
double tangential_l2_norm(const BoundaryField& field);
/// (|w|_{L2}^2 + |grad_tau w|_{L2}^2)^{1/2}.
double h1_norm(const BoundaryField& field);

/// Arc-length derivative by centered differences at the nodes.
BoundaryField tangential_gradient(const BoundaryField& field);

struct AMembership {
  double ratio = 0.0;  // |grad_tau a| / |a|
  bool inside = false;
};

/// in_A: membership test |grad_tau a|_{L2} <= M |a|_{L2}.
AMembership in_A(const BoundaryField& field, double bound);

/// Orthogonal L2 projection onto W_lambda = span{phi_m : lambda_m <= cutoff}.
BoundaryField project_W(const BoundaryField& field, double cutoff, const EigenBasis& basis);

/// Cauchy data on Gamma: trace, conormal derivative and tangential derivative
/// of the trace.
struct CauchyData {
  BoundaryField trace;
  BoundaryField conormal;
  BoundaryField tangential;

  const BoundaryLoop& loop() const { return trace.loop(); }
};

/// Builds CauchyData from trace and conormal, deriving the tangential field.
CauchyData make_cauchy(BoundaryField trace, BoundaryField conormal);
CauchyData operator-(const CauchyData& a, const CauchyData& b);
CauchyData scale(const CauchyData& a, double s);
CauchyData resample(const CauchyData& data, LoopPtr target);

/// C(w) = |w|_{H1(Gamma)} + |d_nu w|_{L2(Gamma)}.
double cauchy_C(const CauchyData& data);
/// Hilbert companion (|w|_{H1}^2 + |d_nu w|_{L2}^2)^{1/2}; C/sqrt(2) <= it <= C.
double cauchy_data_norm(const CauchyData& data);
/// Stacked weighted data vector whose Euclidean norm is cauchy_data_norm.
Eigen::VectorXd data_vector(const CauchyData& data);

struct MultiplierProbe {
  double operator_norm = 0.0;  // sup over the band of |qu|_{H^1/2} / |u|_{H^1/2}
  double best_trial = 0.0;  // largest ratio among the random trials
  double lipschitz_seminorm = 0.0;  // max edge difference quotient of q
};

/// multiplication_bound_probe at t = 1/2 on the band of the first
/// 2 * band_limit + 1 eigenfunctions. The supremum over the band is computed
/// exactly by an SVD; random trials are reported alongside.
MultiplierProbe multiplication_bound_probe(const BoundaryField& q, int trials,
                                           const EigenBasis& basis, int band_limit,
                                           std::uint64_t seed = 7);

}  // namespace robinlab
