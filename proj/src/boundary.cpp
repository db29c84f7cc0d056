#include "robinlab/boundary.hpp"

#include "robinlab/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace robinlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_same(const BoundaryLoop& a, const BoundaryLoop& b, const char* what) {
  if (!same_discretization(a, b)) {
    throw DomainError(std::string(what) + ": fields live on different boundary discretizations");
  }
}

}  // namespace

bool same_discretization(const BoundaryLoop& a, const BoundaryLoop& b) {
  if (&a == &b) return true;
  if (a.tag != b.tag || a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double scale = std::max(std::abs(a.node_weights[k]), 1e-300);
    if (std::abs(a.node_weights[k] - b.node_weights[k]) > 1e-12 * scale) return false;
    if ((a.positions[k] - b.positions[k]).norm() > 1e-12 * std::max(1.0, a.positions[k].norm())) {
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// BoundaryField

BoundaryField::BoundaryField(LoopPtr loop, Eigen::VectorXd values)
    : loop_(std::move(loop)), values_(std::move(values)) {
  if (!loop_) throw DomainError("boundary field without a loop");
  if (static_cast<std::size_t>(values_.size()) != loop_->size()) {
    throw DomainError("boundary field size does not match its loop");
  }
}

BoundaryField BoundaryField::zeros(LoopPtr loop) {
  const auto n = static_cast<Eigen::Index>(loop->size());
  return BoundaryField(std::move(loop), Eigen::VectorXd::Zero(n));
}

BoundaryField BoundaryField::constant(LoopPtr loop, double value) {
  const auto n = static_cast<Eigen::Index>(loop->size());
  return BoundaryField(std::move(loop), Eigen::VectorXd::Constant(n, value));
}

BoundaryField BoundaryField::sample(LoopPtr loop, const std::function<double(double)>& f) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(loop->size()));
  for (std::size_t k = 0; k < loop->size(); ++k) v[static_cast<Eigen::Index>(k)] = f(loop->angles[k]);
  return BoundaryField(std::move(loop), std::move(v));
}

double BoundaryField::edge_value(Index edge, int gp) const {
  const auto& e = loop_->edges[edge];
  const double t = kEdgeGaussParams[static_cast<std::size_t>(gp)];
  return (1.0 - t) * values_[static_cast<Eigen::Index>(e.first)] +
         t * values_[static_cast<Eigen::Index>(e.second)];
}

double BoundaryField::at_angle(double theta) const {
  const auto& ang = loop_->angles;
  const std::size_t n = ang.size();
  double th = std::fmod(theta, kTwoPi);
  if (th < 0.0) th += kTwoPi;
  // angles are increasing from ang[0] (the smallest) around the circle
  auto it = std::upper_bound(ang.begin(), ang.end(), th);
  std::size_t hi = static_cast<std::size_t>(it - ang.begin());
  std::size_t lo;
  double a_lo, a_hi;
  if (hi == 0) {
    lo = n - 1;
    hi = 0;
    a_lo = ang[lo] - kTwoPi;
    a_hi = ang[hi];
  } else if (hi == n) {
    lo = n - 1;
    hi = 0;
    a_lo = ang[lo];
    a_hi = ang[hi] + kTwoPi;
  } else {
    lo = hi - 1;
    a_lo = ang[lo];
    a_hi = ang[hi];
  }
  const double w = (a_hi > a_lo) ? (th - a_lo) / (a_hi - a_lo) : 0.0;
  return (1.0 - w) * values_[static_cast<Eigen::Index>(lo)] +
         w * values_[static_cast<Eigen::Index>(hi)];
}

BoundaryField BoundaryField::resample(LoopPtr target) const {
  if (target->tag != loop_->tag) throw DomainError("resample: target loop has a different tag");
  Eigen::VectorXd v(static_cast<Eigen::Index>(target->size()));
  for (std::size_t k = 0; k < target->size(); ++k) {
    v[static_cast<Eigen::Index>(k)] = at_angle(target->angles[k]);
  }
  return BoundaryField(std::move(target), std::move(v));
}

double BoundaryField::inner(const BoundaryField& other) const {
  require_same(*loop_, other.loop(), "inner product");
  double s = 0.0;
  for (Eigen::Index k = 0; k < values_.size(); ++k) {
    s += loop_->node_weights[static_cast<std::size_t>(k)] * values_[k] * other.values_[k];
  }
  return s;
}

double BoundaryField::l2_norm() const { return std::sqrt(std::max(0.0, inner(*this))); }

BoundaryField& BoundaryField::operator+=(const BoundaryField& other) {
  require_same(*loop_, other.loop(), "addition");
  values_ += other.values_;
  return *this;
}

BoundaryField& BoundaryField::operator-=(const BoundaryField& other) {
  require_same(*loop_, other.loop(), "subtraction");
  values_ -= other.values_;
  return *this;
}

BoundaryField& BoundaryField::operator*=(double s) {
  values_ *= s;
  return *this;
}

BoundaryField operator+(BoundaryField a, const BoundaryField& b) { return a += b; }
BoundaryField operator-(BoundaryField a, const BoundaryField& b) { return a -= b; }
BoundaryField operator*(double s, BoundaryField a) { return a *= s; }

BoundaryField hadamard(const BoundaryField& a, const BoundaryField& b) {
  require_same(a.loop(), b.loop(), "pointwise product");
  return BoundaryField(a.loop_ptr(), a.values().cwiseProduct(b.values()));
}

// ---------------------------------------------------------------------------
// Eigenbasis

std::size_t EigenBasis::count_up_to(double cutoff) const {
  const double limit = cutoff * (1.0 + 1e-10) + 1e-12;
  std::size_t count = 0;
  for (Eigen::Index m = 0; m < eigenvalues.size(); ++m) {
    if (eigenvalues[m] <= limit) ++count;
  }
  return count;
}

BoundaryField EigenBasis::function(std::size_t m) const {
  return BoundaryField(loop, functions.col(static_cast<Eigen::Index>(m)));
}

Eigen::VectorXd EigenBasis::coefficients(const BoundaryField& field) const {
  require_same(*loop, field.loop(), "basis coefficients");
  Eigen::VectorXd weighted = field.values();
  for (std::size_t k = 0; k < loop->size(); ++k) {
    weighted[static_cast<Eigen::Index>(k)] *= loop->node_weights[k];
  }
  return functions.transpose() * weighted;
}

BoundaryField EigenBasis::synthesize(const Eigen::VectorXd& coeffs) const {
  if (coeffs.size() > functions.cols()) throw DomainError("synthesize: too many coefficients");
  return BoundaryField(loop, functions.leftCols(coeffs.size()) * coeffs);
}

EigenBasis lb_eigenbasis(LoopPtr loop, std::size_t count) {
  const std::size_t n = loop->size();
  if (count == 0 || count > n / 2) {
    std::ostringstream os;
    os << "lb_eigenbasis: requested " << count << " eigenpairs but the loop has " << n
       << " nodes (at most n/2 allowed)";
    throw DomainError(os.str());
  }
  const auto N = static_cast<Eigen::Index>(n);
  // Symmetrized generalized problem W^{-1/2} K W^{-1/2}.
  Eigen::VectorXd inv_sqrt_w(N);
  for (std::size_t k = 0; k < n; ++k) {
    inv_sqrt_w[static_cast<Eigen::Index>(k)] = 1.0 / std::sqrt(loop->node_weights[k]);
  }
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N, N);
  for (const auto& e : loop->edges) {
    const double c = 1.0 / e.induced_length();
    const auto i = static_cast<Eigen::Index>(e.first);
    const auto j = static_cast<Eigen::Index>(e.second);
    A(i, i) += c;
    A(j, j) += c;
    A(i, j) -= c;
    A(j, i) -= c;
  }
  A = inv_sqrt_w.asDiagonal() * A * inv_sqrt_w.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(A);
  if (solver.info() != Eigen::Success) throw DomainError("lb_eigenbasis: eigensolver failed");

  const auto M = static_cast<Eigen::Index>(count);
  EigenBasis basis;
  basis.loop = loop;
  basis.eigenvalues = solver.eigenvalues().head(M);
  basis.functions = inv_sqrt_w.asDiagonal() * solver.eigenvectors().leftCols(M);

  // Exact constant mode.
  basis.eigenvalues[0] = 0.0;
  basis.functions.col(0).setConstant(1.0 / std::sqrt(loop->measure()));

  // Deterministic orientation: rotate each degenerate pair so that the first
  // member peaks at node 0 and the second vanishes there (cos/sin on circles);
  // fix the sign of simple eigenvectors.
  Eigen::Index m = 1;
  while (m < M) {
    const double lam = basis.eigenvalues[m];
    const bool pair = (m + 1 < M) &&
                      std::abs(basis.eigenvalues[m + 1] - lam) <= 1e-9 * std::max(1.0, lam);
    if (pair) {
      Eigen::VectorXd p = basis.functions.col(m);
      Eigen::VectorXd q = basis.functions.col(m + 1);
      const double r = std::hypot(p[0], q[0]);
      if (r > 1e-12 * p.cwiseAbs().maxCoeff()) {
        const double c = p[0] / r, s = q[0] / r;
        basis.functions.col(m) = c * p + s * q;
        basis.functions.col(m + 1) = -s * p + c * q;
      }
      if (basis.functions(1, m + 1) < 0.0) basis.functions.col(m + 1) *= -1.0;
      const double mean = 0.5 * (basis.eigenvalues[m] + basis.eigenvalues[m + 1]);
      basis.eigenvalues[m] = mean;
      basis.eigenvalues[m + 1] = mean;
      m += 2;
    } else {
      Eigen::Index k;
      basis.functions.col(m).cwiseAbs().maxCoeff(&k);
      if (basis.functions(k, m) < 0.0) basis.functions.col(m) *= -1.0;
      m += 1;
    }
  }
  return basis;
}

double sobolev_norm(const BoundaryField& field, double t, const EigenBasis& basis) {
  if (!(t >= 0.0 && t <= 1.0)) throw DomainError("sobolev_norm: order t must lie in [0, 1]");
  if (!same_discretization(*basis.loop, field.loop())) {
    throw DomainError("sobolev_norm: basis belongs to a different boundary");
  }
  const Eigen::VectorXd c = basis.coefficients(field);
  double s = 0.0;
  for (Eigen::Index m = 0; m < c.size(); ++m) {
    s += std::pow(1.0 + basis.eigenvalues[m], t) * c[m] * c[m];
  }
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Tangential calculus

Eigen::VectorXd edge_derivatives(const BoundaryField& field) {
  const auto& loop = field.loop();
  Eigen::VectorXd d(static_cast<Eigen::Index>(loop.edges.size()));
  for (std::size_t k = 0; k < loop.edges.size(); ++k) {
    const auto& e = loop.edges[k];
    d[static_cast<Eigen::Index>(k)] = (field[e.second] - field[e.first]) / e.induced_length();
  }
  return d;
}

double tangential_l2_norm(const BoundaryField& field) {
  const Eigen::VectorXd d = edge_derivatives(field);
  double s = 0.0;
  for (std::size_t k = 0; k < field.loop().edges.size(); ++k) {
    s += field.loop().edges[k].induced_length() * d[static_cast<Eigen::Index>(k)] *
         d[static_cast<Eigen::Index>(k)];
  }
  return std::sqrt(s);
}

double h1_norm(const BoundaryField& field) {
  return std::hypot(field.l2_norm(), tangential_l2_norm(field));
}

BoundaryField tangential_gradient(const BoundaryField& field) {
  const auto& loop = field.loop();
  const std::size_t n = loop.size();
  Eigen::VectorXd g(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t prev = (k + n - 1) % n;
    const std::size_t next = (k + 1) % n;
    const double span = loop.edges[prev].induced_length() + loop.edges[k].induced_length();
    g[static_cast<Eigen::Index>(k)] = (field[next] - field[prev]) / span;
  }
  return BoundaryField(field.loop_ptr(), std::move(g));
}

AMembership in_A(const BoundaryField& field, double bound) {
  const double l2 = field.l2_norm();
  if (!(l2 > 0.0)) throw DomainError("in_A: ratio undefined for the zero field");
  AMembership out;
  out.ratio = tangential_l2_norm(field) / l2;
  out.inside = out.ratio <= bound;
  return out;
}

BoundaryField project_W(const BoundaryField& field, double cutoff, const EigenBasis& basis) {
  if (!(cutoff >= 0.0)) throw DomainError("project_W: cutoff must be nonnegative");
  if (cutoff > basis.eigenvalues[basis.eigenvalues.size() - 1]) {
    std::ostringstream os;
    os << "project_W: cutoff " << cutoff << " exceeds the resolved spectrum (largest eigenvalue "
       << basis.eigenvalues[basis.eigenvalues.size() - 1] << ")";
    throw DomainError(os.str());
  }
  const auto count = static_cast<Eigen::Index>(basis.count_up_to(cutoff));
  const Eigen::VectorXd c = basis.coefficients(field);
  return basis.synthesize(c.head(count));
}

// ---------------------------------------------------------------------------
// Cauchy data

CauchyData make_cauchy(BoundaryField trace, BoundaryField conormal) {
  require_same(trace.loop(), conormal.loop(), "Cauchy data");
  BoundaryField tangential = tangential_gradient(trace);
  return CauchyData{std::move(trace), std::move(conormal), std::move(tangential)};
}

CauchyData operator-(const CauchyData& a, const CauchyData& b) {
  return make_cauchy(a.trace - b.trace, a.conormal - b.conormal);
}

CauchyData scale(const CauchyData& a, double s) {
  return make_cauchy(s * a.trace, s * a.conormal);
}

CauchyData resample(const CauchyData& data, LoopPtr target) {
  return make_cauchy(data.trace.resample(target), data.conormal.resample(target));
}

double cauchy_C(const CauchyData& data) {
  return h1_norm(data.trace) + data.conormal.l2_norm();
}

double cauchy_data_norm(const CauchyData& data) {
  return std::hypot(h1_norm(data.trace), data.conormal.l2_norm());
}

Eigen::VectorXd data_vector(const CauchyData& data) {
  const auto& loop = data.loop();
  const auto n = static_cast<Eigen::Index>(loop.size());
  const Eigen::VectorXd d = edge_derivatives(data.trace);
  Eigen::VectorXd v(3 * n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const double sw = std::sqrt(loop.node_weights[ku]);
    v[k] = sw * data.trace.values()[k];
    v[n + k] = std::sqrt(loop.edges[ku].induced_length()) * d[k];
    v[2 * n + k] = sw * data.conormal.values()[k];
  }
  return v;
}

// ---------------------------------------------------------------------------
// Multiplier probe

MultiplierProbe multiplication_bound_probe(const BoundaryField& q, int trials,
                                           const EigenBasis& basis, int band_limit,
                                           std::uint64_t seed) {
  if (!same_discretization(*basis.loop, q.loop())) {
    throw DomainError("multiplication_bound_probe: basis belongs to a different boundary");
  }
  const auto band = static_cast<Eigen::Index>(2 * band_limit + 1);
  if (band_limit < 0 || band + 2 > basis.functions.cols()) {
    throw DomainError("multiplication_bound_probe: band limit exceeds the resolved basis");
  }
  const auto& loop = *basis.loop;
  const Eigen::Index M = basis.functions.cols();
  Eigen::VectorXd half_weights(M);
  for (Eigen::Index m = 0; m < M; ++m) half_weights[m] = std::pow(1.0 + basis.eigenvalues[m], 0.25);

  // Matrix of u -> q u from band coefficients to full coefficients.
  Eigen::VectorXd wq(static_cast<Eigen::Index>(loop.size()));
  for (std::size_t k = 0; k < loop.size(); ++k) {
    wq[static_cast<Eigen::Index>(k)] = loop.node_weights[k] * q[k];
  }
  const Eigen::MatrixXd mult =
      basis.functions.transpose() * wq.asDiagonal() * basis.functions.leftCols(band);
  const Eigen::MatrixXd scaled =
      half_weights.asDiagonal() * mult * half_weights.head(band).cwiseInverse().asDiagonal();

  MultiplierProbe out;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled);
  out.operator_norm = svd.singularValues()[0];

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int t = 0; t < trials; ++t) {
    Eigen::VectorXd x(band);
    for (Eigen::Index m = 0; m < band; ++m) x[m] = normal(rng);
    const double num = (scaled * x).norm();
    const double den = x.norm();
    if (den > 0.0) out.best_trial = std::max(out.best_trial, num / den);
  }

  for (const auto& e : loop.edges) {
    out.lipschitz_seminorm =
        std::max(out.lipschitz_seminorm, std::abs(q[e.second] - q[e.first]) / e.induced_length());
  }
  return out;
}

}  // namespace robinlab
