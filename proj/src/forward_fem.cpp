#include "robinlab/forward_fem.hpp"

#include "robinlab/errors.hpp"

#include <Eigen/SparseCholesky>

#include <array>
#include <cmath>
#include <sstream>
#include <vector>

namespace robinlab {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

// Gradients of the three P1 hat functions on a triangle.
std::array<Vec2, 3> hat_gradients(const Vec2& a, const Vec2& b, const Vec2& c, double area) {
  const double s = 0.5 / area;
  return {Vec2(b.y() - c.y(), c.x() - b.x()) * s, Vec2(c.y() - a.y(), a.x() - c.x()) * s,
          Vec2(a.y() - b.y(), b.x() - a.x()) * s};
}

struct QuadPoint {
  std::array<double, 3> bary;
  double weight;
};

// Degree-5, 7-point rule on the reference triangle (weights sum to 1).
const std::array<QuadPoint, 7>& seven_point_rule() {
  static const std::array<QuadPoint, 7> rule = [] {
    const double a1 = 0.059715871789769820, b1 = 0.470142064105115090;
    const double a2 = 0.797426985353087322, b2 = 0.101286507323456339;
    const double w0 = 0.225, w1 = 0.132394152788506181, w2 = 0.125939180544827153;
    return std::array<QuadPoint, 7>{{{{1.0 / 3, 1.0 / 3, 1.0 / 3}, w0},
                                     {{a1, b1, b1}, w1},
                                     {{b1, a1, b1}, w1},
                                     {{b1, b1, a1}, w1},
                                     {{a2, b2, b2}, w2},
                                     {{b2, a2, b2}, w2},
                                     {{b2, b2, a2}, w2}}};
  }();
  return rule;
}

void check_metric(const Mesh& mesh, const MetricTensor& metric) {
  if (mesh.metric_tag != metric.tag()) {
    throw GeometryError("mesh boundary data were computed for metric '" + mesh.metric_tag +
                        "', not '" + metric.tag() + "'; call boundary_normals first");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// BoundaryFunction

BoundaryFunction BoundaryFunction::constant(double value) {
  BoundaryFunction f;
  f.kind_ = Kind::Constant;
  f.value_ = value;
  return f;
}

BoundaryFunction BoundaryFunction::angular(std::function<double(double)> fn) {
  BoundaryFunction f;
  f.kind_ = Kind::Angular;
  f.fn_ = std::move(fn);
  return f;
}

BoundaryFunction BoundaryFunction::nodal(BoundaryField field) {
  BoundaryFunction f;
  f.kind_ = Kind::Nodal;
  f.field_ = std::make_shared<const BoundaryField>(std::move(field));
  return f;
}

void BoundaryFunction::check_loop(const BoundaryLoop& loop) const {
  if (kind_ == Kind::Nodal && !same_discretization(field_->loop(), loop)) {
    throw DomainError("nodal boundary function does not belong to boundary " + to_string(loop.tag));
  }
}

double BoundaryFunction::at_node(const BoundaryLoop& loop, Index k) const {
  switch (kind_) {
    case Kind::Constant:
      return value_;
    case Kind::Angular:
      return fn_(loop.angles[k]);
    case Kind::Nodal:
      return (*field_)[k];
  }
  return 0.0;
}

double BoundaryFunction::at_gauss(const BoundaryLoop& loop, Index edge, int gp) const {
  switch (kind_) {
    case Kind::Constant:
      return value_;
    case Kind::Angular:
      return fn_(loop.gauss_angle(edge, gp));
    case Kind::Nodal:
      return field_->edge_value(edge, gp);
  }
  return 0.0;
}

BoundaryField BoundaryFunction::on(const LoopPtr& loop) const {
  check_loop(*loop);
  Eigen::VectorXd v(static_cast<Eigen::Index>(loop->size()));
  for (std::size_t k = 0; k < loop->size(); ++k) v[static_cast<Eigen::Index>(k)] = at_node(*loop, k);
  return BoundaryField(loop, std::move(v));
}

// ---------------------------------------------------------------------------
// Problem validation

void RobinProblem::validate(const Mesh& mesh) const {
  if (!(absorption >= 0.0)) throw CoercivityError("absorption p must be a constant >= 0");
  if (!(kappa > 0.0)) throw CoercivityError("admissibility cap kappa must be positive");
  bool q_positive_somewhere = false;
  for (BoundaryTag tag : {BoundaryTag::S, BoundaryTag::Gamma}) {
    const auto& loop = mesh.loop(tag);
    const auto& qf = q(tag);
    qf.check_loop(loop);
    flux(tag).check_loop(loop);
    auto check = [&](double value, double theta) {
      if (!(value >= 0.0)) {
        std::ostringstream os;
        os << "q on " << to_string(tag) << " must be >= 0; found " << value << " at theta = " << theta;
        throw CoercivityError(os.str());
      }
      if (value > kappa * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "q on " << to_string(tag) << " exceeds the cap kappa = " << kappa << "; found "
           << value << " at theta = " << theta;
        throw CoercivityError(os.str());
      }
      if (value > 0.0) q_positive_somewhere = true;
    };
    for (std::size_t k = 0; k < loop.size(); ++k) check(qf.at_node(loop, k), loop.angles[k]);
    for (std::size_t e = 0; e < loop.edges.size(); ++e) {
      for (int gp = 0; gp < 2; ++gp) check(qf.at_gauss(loop, e, gp), loop.gauss_angle(e, gp));
    }
  }
  if (!q_positive_somewhere && !(absorption > 0.0)) {
    throw CoercivityError(
        "coercivity guard violated: q vanishes identically on the boundary and p = 0");
  }
}

// ---------------------------------------------------------------------------
// Assembly

Eigen::VectorXd assemble_boundary_load(const Mesh& mesh, BoundaryTag tag,
                                       const BoundaryFunction& flux) {
  const auto& loop = mesh.loop(tag);
  flux.check_loop(loop);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_vertices()));
  for (std::size_t e = 0; e < loop.edges.size(); ++e) {
    const auto& edge = loop.edges[e];
    const auto i = static_cast<Eigen::Index>(loop.nodes[edge.first]);
    const auto j = static_cast<Eigen::Index>(loop.nodes[edge.second]);
    for (int gp = 0; gp < 2; ++gp) {
      const double t = kEdgeGaussParams[static_cast<std::size_t>(gp)];
      const double wa = edge.weights[static_cast<std::size_t>(gp)] * flux.at_gauss(loop, e, gp);
      b[i] += wa * (1.0 - t);
      b[j] += wa * t;
    }
  }
  return b;
}

LinearSystem assemble(const RobinProblem& problem, const Mesh& mesh, const MetricTensor& metric) {
  check_metric(mesh, metric);
  problem.validate(mesh);
  const auto n = static_cast<Eigen::Index>(mesh.num_vertices());
  Triplets stiff, mass, robin;
  stiff.reserve(9 * mesh.triangles.size());
  if (problem.absorption > 0.0) mass.reserve(9 * mesh.triangles.size());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);

  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Vec2& a = mesh.vertices[tri[0]];
    const Vec2& b = mesh.vertices[tri[1]];
    const Vec2& c = mesh.vertices[tri[2]];
    const Vec2 bary = (a + b + c) / 3.0;
    const MetricSample ms = metric.eval(bary);
    const double vol = mesh.areas[t] * ms.sqrt_det;
    const auto grads = hat_gradients(a, b, c, mesh.areas[t]);
    for (int i = 0; i < 3; ++i) {
      const Vec2 gi = ms.g_inv * grads[static_cast<std::size_t>(i)];
      for (int j = 0; j < 3; ++j) {
        stiff.emplace_back(static_cast<Eigen::Index>(tri[static_cast<std::size_t>(i)]),
                           static_cast<Eigen::Index>(tri[static_cast<std::size_t>(j)]),
                           vol * gi.dot(grads[static_cast<std::size_t>(j)]));
      }
    }
    if (problem.absorption > 0.0) {
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          mass.emplace_back(static_cast<Eigen::Index>(tri[static_cast<std::size_t>(i)]),
                            static_cast<Eigen::Index>(tri[static_cast<std::size_t>(j)]),
                            problem.absorption * vol * (i == j ? 2.0 : 1.0) / 12.0);
        }
      }
    }
    if (problem.source) {
      const double f = problem.source(bary);
      for (Index v : tri) rhs[static_cast<Eigen::Index>(v)] += f * vol / 3.0;
    }
  }

  for (BoundaryTag tag : {BoundaryTag::S, BoundaryTag::Gamma}) {
    const auto& loop = mesh.loop(tag);
    const auto& qf = problem.q(tag);
    for (std::size_t e = 0; e < loop.edges.size(); ++e) {
      const auto& edge = loop.edges[e];
      const std::array<Eigen::Index, 2> ids = {static_cast<Eigen::Index>(loop.nodes[edge.first]),
                                               static_cast<Eigen::Index>(loop.nodes[edge.second])};
      for (int gp = 0; gp < 2; ++gp) {
        const double t = kEdgeGaussParams[static_cast<std::size_t>(gp)];
        const std::array<double, 2> phi = {1.0 - t, t};
        const double wq = edge.weights[static_cast<std::size_t>(gp)] * qf.at_gauss(loop, e, gp);
        for (int i = 0; i < 2; ++i) {
          for (int j = 0; j < 2; ++j) {
            robin.emplace_back(ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(j)],
                               wq * phi[static_cast<std::size_t>(i)] * phi[static_cast<std::size_t>(j)]);
          }
        }
      }
    }
    rhs += assemble_boundary_load(mesh, tag, problem.flux(tag));
  }

  LinearSystem sys;
  sys.stiffness.resize(n, n);
  sys.stiffness.setFromTriplets(stiff.begin(), stiff.end());
  sys.robin.resize(n, n);
  sys.robin.setFromTriplets(robin.begin(), robin.end());
  sys.absorption.resize(n, n);
  sys.absorption.setFromTriplets(mass.begin(), mass.end());
  sys.matrix = sys.stiffness + sys.robin + sys.absorption;
  sys.matrix.makeCompressed();
  sys.rhs = std::move(rhs);
  return sys;
}

// ---------------------------------------------------------------------------
// Solvers

struct FactoredOperator::Impl {
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> llt;
};

FactoredOperator::FactoredOperator(const Eigen::SparseMatrix<double>& matrix)
    : impl_(std::make_unique<Impl>()) {
  impl_->llt.compute(matrix);
  if (impl_->llt.info() != Eigen::Success) {
    throw CoercivityError("Cholesky factorization failed: matrix is not positive definite");
  }
}

FactoredOperator::~FactoredOperator() = default;
FactoredOperator::FactoredOperator(FactoredOperator&&) noexcept = default;
FactoredOperator& FactoredOperator::operator=(FactoredOperator&&) noexcept = default;

Eigen::VectorXd FactoredOperator::solve(const Eigen::VectorXd& rhs) const {
  return impl_->llt.solve(rhs);
}

namespace {

SolveResult conjugate_gradient(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b,
                               double tol) {
  const Eigen::Index n = A.rows();
  SolveResult out;
  out.x = Eigen::VectorXd::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) return out;
  const int cap = static_cast<int>(10 * n);
  const Eigen::VectorXd inv_diag = A.diagonal().cwiseInverse();
  Eigen::VectorXd r = b;
  int it = 0;
  while (true) {
    // (Re)start from the current iterate with the true residual.
    Eigen::VectorXd z = inv_diag.cwiseProduct(r);
    Eigen::VectorXd p = z;
    double rz = r.dot(z);
    double rel = r.norm() / bnorm;
    while (rel > tol) {
      if (it >= cap) {
        std::ostringstream os;
        os << "conjugate gradients did not converge in " << cap << " iterations (relative residual "
           << rel << ", target " << tol << ")";
        throw ConvergenceError(os.str(), rel, it);
      }
      const Eigen::VectorXd Ap = A * p;
      const double alpha = rz / p.dot(Ap);
      out.x += alpha * p;
      r -= alpha * Ap;
      z = inv_diag.cwiseProduct(r);
      const double rz_new = r.dot(z);
      p = z + (rz_new / rz) * p;
      rz = rz_new;
      rel = r.norm() / bnorm;
      ++it;
    }
    r = b - A * out.x;
    rel = r.norm() / bnorm;
    if (rel <= tol || it >= cap) {
      out.iterations = it;
      out.relative_residual = rel;
      if (rel > tol) {
        throw ConvergenceError("conjugate gradients stalled above the target residual", rel, it);
      }
      return out;
    }
  }
}

}  // namespace

SolveResult solve(const Eigen::SparseMatrix<double>& matrix, const Eigen::VectorXd& rhs, double tol,
                  SolveMethod method) {
  if (!(tol >= 1e-14 && tol <= 1e-6)) {
    throw DomainError("solve: tolerance must lie in [1e-14, 1e-6]");
  }
  if (method == SolveMethod::Auto) {
    method = matrix.rows() < 2000 ? SolveMethod::Cholesky : SolveMethod::ConjugateGradient;
  }
  if (method == SolveMethod::ConjugateGradient) return conjugate_gradient(matrix, rhs, tol);
  SolveResult out;
  if (rhs.norm() == 0.0) {
    out.x = Eigen::VectorXd::Zero(rhs.size());
    return out;
  }
  FactoredOperator op(matrix);
  out.x = op.solve(rhs);
  out.relative_residual = (rhs - matrix * out.x).norm() / rhs.norm();
  if (out.relative_residual > tol) {
    // One step of iterative refinement recovers the last digits.
    out.x += op.solve(rhs - matrix * out.x);
    out.relative_residual = (rhs - matrix * out.x).norm() / rhs.norm();
  }
  return out;
}

SolveResult solve(const LinearSystem& system, double tol, SolveMethod method) {
  return solve(system.matrix, system.rhs, tol, method);
}

// ---------------------------------------------------------------------------
// Solutions

BoundaryField restrict_to(const Eigen::VectorXd& u, const LoopPtr& loop) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(loop->size()));
  for (std::size_t k = 0; k < loop->size(); ++k) {
    v[static_cast<Eigen::Index>(k)] = u[static_cast<Eigen::Index>(loop->nodes[k])];
  }
  return BoundaryField(loop, std::move(v));
}

ForwardSolution make_solution(Eigen::VectorXd nodal, const RobinProblem& problem, const Mesh& mesh,
                              const MetricTensor& metric) {
  BoundaryField trace_S = restrict_to(nodal, mesh.inner);
  BoundaryField trace_G = restrict_to(nodal, mesh.outer);
  const BoundaryField flux_G = problem.flux_Gamma.on(mesh.outer);
  const BoundaryField q_G = problem.q_Gamma.on(mesh.outer);
  BoundaryField conormal = flux_G - hadamard(q_G, trace_G);
  const double energy = energy_form(nodal, problem, mesh, metric);
  return ForwardSolution{std::move(nodal), std::move(trace_S), std::move(trace_G),
                         std::move(conormal), energy, 0, 0.0};
}

ForwardSolution solve_forward(const RobinProblem& problem, const Mesh& mesh,
                              const MetricTensor& metric, const ForwardOptions& options) {
  const LinearSystem sys = assemble(problem, mesh, metric);
  SolveResult res = solve(sys, options.tol, options.method);
  ForwardSolution sol = make_solution(std::move(res.x), problem, mesh, metric);
  sol.iterations = res.iterations;
  sol.relative_residual = res.relative_residual;
  return sol;
}

CauchyData extract_cauchy(const ForwardSolution& solution, const RobinProblem& problem) {
  const LoopPtr& loop = solution.trace_Gamma.loop_ptr();
  const BoundaryField flux = problem.flux_Gamma.on(loop);
  const BoundaryField q = problem.q_Gamma.on(loop);
  return make_cauchy(solution.trace_Gamma, flux - hadamard(q, solution.trace_Gamma));
}

double energy_form(const Eigen::VectorXd& u, const RobinProblem& problem, const Mesh& mesh,
                   const MetricTensor& metric) {
  check_metric(mesh, metric);
  double interior = 0.0;
  double absorption = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Vec2& a = mesh.vertices[tri[0]];
    const Vec2& b = mesh.vertices[tri[1]];
    const Vec2& c = mesh.vertices[tri[2]];
    const MetricSample ms = metric.eval((a + b + c) / 3.0);
    const double vol = mesh.areas[t] * ms.sqrt_det;
    const auto grads = hat_gradients(a, b, c, mesh.areas[t]);
    const std::array<double, 3> uv = {u[static_cast<Eigen::Index>(tri[0])],
                                      u[static_cast<Eigen::Index>(tri[1])],
                                      u[static_cast<Eigen::Index>(tri[2])]};
    const Vec2 grad = uv[0] * grads[0] + uv[1] * grads[1] + uv[2] * grads[2];
    interior += vol * grad.dot(ms.g_inv * grad);
    if (problem.absorption > 0.0) {
      const double s = uv[0] + uv[1] + uv[2];
      const double sq = uv[0] * uv[0] + uv[1] * uv[1] + uv[2] * uv[2];
      absorption += problem.absorption * vol * (sq + s * s) / 12.0;
    }
  }
  double boundary = 0.0;
  for (BoundaryTag tag : {BoundaryTag::S, BoundaryTag::Gamma}) {
    const auto& loop = mesh.loop(tag);
    const auto& qf = problem.q(tag);
    for (std::size_t e = 0; e < loop.edges.size(); ++e) {
      const auto& edge = loop.edges[e];
      const double ua = u[static_cast<Eigen::Index>(loop.nodes[edge.first])];
      const double ub = u[static_cast<Eigen::Index>(loop.nodes[edge.second])];
      for (int gp = 0; gp < 2; ++gp) {
        const double t = kEdgeGaussParams[static_cast<std::size_t>(gp)];
        const double ug = (1.0 - t) * ua + t * ub;
        boundary += edge.weights[static_cast<std::size_t>(gp)] * qf.at_gauss(loop, e, gp) * ug * ug;
      }
    }
  }
  return interior + boundary + absorption;
}

double load_functional(const Eigen::VectorXd& u, const RobinProblem& problem, const Mesh& mesh) {
  double volume = 0.0;
  if (problem.source) {
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
      const auto& tri = mesh.triangles[t];
      const Vec2 bary =
          (mesh.vertices[tri[0]] + mesh.vertices[tri[1]] + mesh.vertices[tri[2]]) / 3.0;
      const double mean = (u[static_cast<Eigen::Index>(tri[0])] + u[static_cast<Eigen::Index>(tri[1])] +
                           u[static_cast<Eigen::Index>(tri[2])]) /
                          3.0;
      volume += problem.source(bary) * mesh.volume_weights[t] * mean;
    }
  }
  double boundary = 0.0;
  for (BoundaryTag tag : {BoundaryTag::S, BoundaryTag::Gamma}) {
    const auto& loop = mesh.loop(tag);
    const auto& af = problem.flux(tag);
    for (std::size_t e = 0; e < loop.edges.size(); ++e) {
      const auto& edge = loop.edges[e];
      const double ua = u[static_cast<Eigen::Index>(loop.nodes[edge.first])];
      const double ub = u[static_cast<Eigen::Index>(loop.nodes[edge.second])];
      for (int gp = 0; gp < 2; ++gp) {
        const double t = kEdgeGaussParams[static_cast<std::size_t>(gp)];
        boundary += edge.weights[static_cast<std::size_t>(gp)] * af.at_gauss(loop, e, gp) *
                    ((1.0 - t) * ua + t * ub);
      }
    }
  }
  return volume + boundary;
}

double energy_identity_residual(const Eigen::VectorXd& u, const RobinProblem& problem,
                                const Mesh& mesh, const MetricTensor& metric) {
  const double lhs = energy_form(u, problem, mesh, metric);
  const double rhs = load_functional(u, problem, mesh);
  const double scale = std::abs(rhs);
  if (scale == 0.0) return std::abs(lhs);
  return std::abs(lhs - rhs) / scale;
}

// ---------------------------------------------------------------------------
// Domain norms

double domain_l2_norm(const Eigen::VectorXd& u, const Mesh& mesh) {
  double s = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double a = u[static_cast<Eigen::Index>(tri[0])];
    const double b = u[static_cast<Eigen::Index>(tri[1])];
    const double c = u[static_cast<Eigen::Index>(tri[2])];
    const double sum = a + b + c;
    s += mesh.volume_weights[t] * (a * a + b * b + c * c + sum * sum) / 12.0;
  }
  return std::sqrt(s);
}

double domain_h1_norm(const Eigen::VectorXd& u, const Mesh& mesh, const MetricTensor& metric) {
  check_metric(mesh, metric);
  double grad2 = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Vec2& a = mesh.vertices[tri[0]];
    const Vec2& b = mesh.vertices[tri[1]];
    const Vec2& c = mesh.vertices[tri[2]];
    const MetricSample ms = metric.eval((a + b + c) / 3.0);
    const auto grads = hat_gradients(a, b, c, mesh.areas[t]);
    const Vec2 g = u[static_cast<Eigen::Index>(tri[0])] * grads[0] +
                   u[static_cast<Eigen::Index>(tri[1])] * grads[1] +
                   u[static_cast<Eigen::Index>(tri[2])] * grads[2];
    grad2 += mesh.areas[t] * ms.sqrt_det * g.dot(ms.g_inv * g);
  }
  const double l2 = domain_l2_norm(u, mesh);
  return std::sqrt(l2 * l2 + grad2);
}

double l2_error(const Eigen::VectorXd& u, const std::function<double(const Vec2&)>& exact,
                const Mesh& mesh) {
  double s = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Vec2& a = mesh.vertices[tri[0]];
    const Vec2& b = mesh.vertices[tri[1]];
    const Vec2& c = mesh.vertices[tri[2]];
    for (const auto& qp : seven_point_rule()) {
      const Vec2 x = qp.bary[0] * a + qp.bary[1] * b + qp.bary[2] * c;
      const double uh = qp.bary[0] * u[static_cast<Eigen::Index>(tri[0])] +
                        qp.bary[1] * u[static_cast<Eigen::Index>(tri[1])] +
                        qp.bary[2] * u[static_cast<Eigen::Index>(tri[2])];
      const double d = uh - exact(x);
      s += qp.weight * mesh.areas[t] * d * d;
    }
  }
  return std::sqrt(s);
}

double l2_norm_exact(const std::function<double(const Vec2&)>& exact, const Mesh& mesh) {
  double s = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (const auto& qp : seven_point_rule()) {
      const Vec2 x = qp.bary[0] * mesh.vertices[tri[0]] + qp.bary[1] * mesh.vertices[tri[1]] +
                     qp.bary[2] * mesh.vertices[tri[2]];
      const double v = exact(x);
      s += qp.weight * mesh.areas[t] * v * v;
    }
  }
  return std::sqrt(s);
}

double h1_seminorm_error(const Eigen::VectorXd& u, const std::function<Vec2(const Vec2&)>& grad,
                         const Mesh& mesh) {
  double s = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Vec2& a = mesh.vertices[tri[0]];
    const Vec2& b = mesh.vertices[tri[1]];
    const Vec2& c = mesh.vertices[tri[2]];
    const auto grads = hat_gradients(a, b, c, mesh.areas[t]);
    const Vec2 gh = u[static_cast<Eigen::Index>(tri[0])] * grads[0] +
                    u[static_cast<Eigen::Index>(tri[1])] * grads[1] +
                    u[static_cast<Eigen::Index>(tri[2])] * grads[2];
    for (const auto& qp : seven_point_rule()) {
      const Vec2 x = qp.bary[0] * a + qp.bary[1] * b + qp.bary[2] * c;
      s += qp.weight * mesh.areas[t] * (gh - grad(x)).squaredNorm();
    }
  }
  return std::sqrt(s);
}

}  // namespace robinlab
