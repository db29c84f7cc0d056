#include "robinlab/spectral.hpp"

#include "robinlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace robinlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void validate(const AnnulusParams& p, int n) {
  if (!(p.inner_radius > 0.0 && p.outer_radius > p.inner_radius)) {
    throw DomainError("spectral oracle needs 0 < R0 < R1");
  }
  if (!(p.q_S >= 0.0 && p.q_Gamma >= 0.0)) {
    throw CoercivityError("spectral oracle needs q_S >= 0 and q_Gamma >= 0");
  }
  if (n == 0 && p.q_S == 0.0 && p.q_Gamma == 0.0) {
    throw CoercivityError("mode 0 is singular when q_S and q_Gamma both vanish");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// FourierSeries

int FourierSeries::order() const {
  return static_cast<int>(std::max(cos.size(), sin.size()));
}

double FourierSeries::cos_coeff(int n) const {
  return (n >= 1 && static_cast<std::size_t>(n) <= cos.size()) ? cos[static_cast<std::size_t>(n - 1)] : 0.0;
}

double FourierSeries::sin_coeff(int n) const {
  return (n >= 1 && static_cast<std::size_t>(n) <= sin.size()) ? sin[static_cast<std::size_t>(n - 1)] : 0.0;
}

double FourierSeries::operator()(double theta) const {
  double v = a0;
  for (std::size_t k = 0; k < cos.size(); ++k) v += cos[k] * std::cos(static_cast<double>(k + 1) * theta);
  for (std::size_t k = 0; k < sin.size(); ++k) v += sin[k] * std::sin(static_cast<double>(k + 1) * theta);
  return v;
}

FourierSeries FourierSeries::constant(double value) {
  FourierSeries s;
  s.a0 = value;
  return s;
}

FourierSeries FourierSeries::cosine(int n, double amplitude) {
  FourierSeries s;
  if (n == 0) {
    s.a0 = amplitude;
  } else {
    s.cos.assign(static_cast<std::size_t>(n), 0.0);
    s.cos.back() = amplitude;
  }
  return s;
}

FourierSeries FourierSeries::sine(int n, double amplitude) {
  if (n < 1) throw DomainError("sine mode needs n >= 1");
  FourierSeries s;
  s.sin.assign(static_cast<std::size_t>(n), 0.0);
  s.sin.back() = amplitude;
  return s;
}

FourierSeries FourierSeries::from_field(const BoundaryField& field, int order) {
  const auto& ang = field.loop().angles;
  const std::size_t n = ang.size();
  if (order < 0 || 2 * static_cast<std::size_t>(order) >= n) {
    throw DomainError("from_field: order must stay below half the node count");
  }
  std::vector<double> w(n);
  for (std::size_t k = 0; k < n; ++k) {
    double prev = ang[(k + n - 1) % n];
    double next = ang[(k + 1) % n];
    if (k == 0) prev -= kTwoPi;
    if (k + 1 == n) next += kTwoPi;
    w[k] = 0.5 * (next - prev);
  }
  FourierSeries s;
  s.cos.assign(static_cast<std::size_t>(order), 0.0);
  s.sin.assign(static_cast<std::size_t>(order), 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double f = field[k] * w[k];
    s.a0 += f / kTwoPi;
    for (int m = 1; m <= order; ++m) {
      s.cos[static_cast<std::size_t>(m - 1)] += f * std::cos(m * ang[k]) / std::numbers::pi;
      s.sin[static_cast<std::size_t>(m - 1)] += f * std::sin(m * ang[k]) / std::numbers::pi;
    }
  }
  return s;
}

double max_coefficient_difference(const FourierSeries& a, const FourierSeries& b) {
  double d = std::abs(a.a0 - b.a0);
  const int order = std::max(a.order(), b.order());
  for (int n = 1; n <= order; ++n) {
    d = std::max(d, std::abs(a.cos_coeff(n) - b.cos_coeff(n)));
    d = std::max(d, std::abs(a.sin_coeff(n) - b.sin_coeff(n)));
  }
  return d;
}

// ---------------------------------------------------------------------------
// Modes

double radial_profile(int n, const ModeCoefficients& c, double r) {
  if (n == 0) return c.alpha + c.beta * std::log(r);
  return c.alpha * std::pow(r, n) + c.beta * std::pow(r, -n);
}

double radial_profile_derivative(int n, const ModeCoefficients& c, double r) {
  if (n == 0) return c.beta / r;
  return n * (c.alpha * std::pow(r, n - 1) - c.beta * std::pow(r, -n - 1));
}

ModeCoefficients solve_mode(int n, const AnnulusParams& p, double flux_S, double flux_Gamma) {
  if (n < 0) throw DomainError("solve_mode: mode index must be >= 0");
  validate(p, n);
  const double R0 = p.inner_radius, R1 = p.outer_radius;
  if (n == 0) {
    // u = alpha + beta ln r
    const double a11 = p.q_S, a12 = -1.0 / R0 + p.q_S * std::log(R0);
    const double a21 = p.q_Gamma, a22 = 1.0 / R1 + p.q_Gamma * std::log(R1);
    const double det = a11 * a22 - a12 * a21;
    if (!(std::abs(det) > 0.0)) throw CoercivityError("solve_mode: singular radial system");
    return {(flux_S * a22 - a12 * flux_Gamma) / det, (a11 * flux_Gamma - a21 * flux_S) / det};
  }
  // u = A (r/R1)^n + B (R0/r)^n keeps both rows O(1) for large n.
  const double nn = static_cast<double>(n);
  const double ratio = std::pow(R0 / R1, nn);
  const double a11 = (-nn / R0 + p.q_S) * ratio, a12 = nn / R0 + p.q_S;
  const double a21 = nn / R1 + p.q_Gamma, a22 = (-nn / R1 + p.q_Gamma) * ratio;
  const double det = a11 * a22 - a12 * a21;
  if (!(std::abs(det) > 0.0)) throw CoercivityError("solve_mode: singular mode system");
  const double A = (flux_S * a22 - a12 * flux_Gamma) / det;
  const double B = (a11 * flux_Gamma - a21 * flux_S) / det;
  return {A / std::pow(R1, nn), B * std::pow(R0, nn)};
}

double mode_residual(int n, const AnnulusParams& p, const ModeCoefficients& c, double flux_S,
                     double flux_Gamma) {
  const double R0 = p.inner_radius, R1 = p.outer_radius;
  const double rs = -radial_profile_derivative(n, c, R0) + p.q_S * radial_profile(n, c, R0) - flux_S;
  const double rg = radial_profile_derivative(n, c, R1) + p.q_Gamma * radial_profile(n, c, R1) - flux_Gamma;
  const double scale = std::max(std::abs(flux_S), std::abs(flux_Gamma));
  const double res = std::max(std::abs(rs), std::abs(rg));
  return scale > 0.0 ? res / scale : res;
}

ModeSolution::ModeSolution(AnnulusParams params, std::vector<ModeCoefficients> cos_modes,
                           std::vector<ModeCoefficients> sin_modes)
    : params_(params), cos_(std::move(cos_modes)), sin_(std::move(sin_modes)) {
  if (cos_.empty() || sin_.size() != cos_.size()) throw DomainError("ModeSolution: malformed modes");
}

double ModeSolution::value(double r, double theta) const {
  double v = radial_profile(0, cos_[0], r);
  for (int n = 1; n <= order(); ++n) {
    v += radial_profile(n, cos_mode(n), r) * std::cos(n * theta) +
         radial_profile(n, sin_mode(n), r) * std::sin(n * theta);
  }
  return v;
}

double ModeSolution::radial_derivative(double r, double theta) const {
  double v = radial_profile_derivative(0, cos_[0], r);
  for (int n = 1; n <= order(); ++n) {
    v += radial_profile_derivative(n, cos_mode(n), r) * std::cos(n * theta) +
         radial_profile_derivative(n, sin_mode(n), r) * std::sin(n * theta);
  }
  return v;
}

double ModeSolution::angular_derivative(double r, double theta) const {
  double v = 0.0;
  for (int n = 1; n <= order(); ++n) {
    v += n * (-radial_profile(n, cos_mode(n), r) * std::sin(n * theta) +
              radial_profile(n, sin_mode(n), r) * std::cos(n * theta));
  }
  return v;
}

double ModeSolution::operator()(const Vec2& x) const {
  return value(x.norm(), std::atan2(x.y(), x.x()));
}

Vec2 ModeSolution::gradient(const Vec2& x) const {
  const double r = x.norm();
  const double th = std::atan2(x.y(), x.x());
  const double ur = radial_derivative(r, th);
  const double ut = angular_derivative(r, th) / r;
  const Vec2 er(std::cos(th), std::sin(th));
  const Vec2 et(-std::sin(th), std::cos(th));
  return ur * er + ut * et;
}

ModeSolution spectral_solve(const FourierSeries& flux_S, const FourierSeries& flux_Gamma,
                            const AnnulusParams& params) {
  const int order = std::max(flux_S.order(), flux_Gamma.order());
  std::vector<ModeCoefficients> cos_modes(static_cast<std::size_t>(order + 1));
  std::vector<ModeCoefficients> sin_modes(static_cast<std::size_t>(order + 1));
  cos_modes[0] = solve_mode(0, params, flux_S.a0, flux_Gamma.a0);
  for (int n = 1; n <= order; ++n) {
    cos_modes[static_cast<std::size_t>(n)] =
        solve_mode(n, params, flux_S.cos_coeff(n), flux_Gamma.cos_coeff(n));
    sin_modes[static_cast<std::size_t>(n)] =
        solve_mode(n, params, flux_S.sin_coeff(n), flux_Gamma.sin_coeff(n));
  }
  return ModeSolution(params, std::move(cos_modes), std::move(sin_modes));
}

double spectral_field(const ModeSolution& solution, double r, double theta) {
  const auto& p = solution.params();
  if (r < p.inner_radius || r > p.outer_radius) {
    std::ostringstream os;
    os << "spectral_field: r = " << r << " lies outside the annulus [" << p.inner_radius << ", "
       << p.outer_radius << "]";
    throw DomainError(os.str());
  }
  return solution.value(r, theta);
}

SpectralCauchy spectral_forward(const FourierSeries& flux_S, const FourierSeries& flux_Gamma,
                                const AnnulusParams& params) {
  const ModeSolution sol = spectral_solve(flux_S, flux_Gamma, params);
  const double R1 = params.outer_radius;
  const int order = sol.order();
  SpectralCauchy out;
  out.trace.a0 = radial_profile(0, sol.cos_mode(0), R1);
  out.conormal.a0 = radial_profile_derivative(0, sol.cos_mode(0), R1);
  out.trace.cos.resize(static_cast<std::size_t>(order));
  out.trace.sin.resize(static_cast<std::size_t>(order));
  out.conormal.cos.resize(static_cast<std::size_t>(order));
  out.conormal.sin.resize(static_cast<std::size_t>(order));
  for (int n = 1; n <= order; ++n) {
    const auto k = static_cast<std::size_t>(n - 1);
    out.trace.cos[k] = radial_profile(n, sol.cos_mode(n), R1);
    out.trace.sin[k] = radial_profile(n, sol.sin_mode(n), R1);
    out.conormal.cos[k] = radial_profile_derivative(n, sol.cos_mode(n), R1);
    out.conormal.sin[k] = radial_profile_derivative(n, sol.sin_mode(n), R1);
  }
  out.conormal_robin.a0 = flux_Gamma.a0 - params.q_Gamma * out.trace.a0;
  out.conormal_robin.cos.resize(static_cast<std::size_t>(order));
  out.conormal_robin.sin.resize(static_cast<std::size_t>(order));
  for (int n = 1; n <= order; ++n) {
    const auto k = static_cast<std::size_t>(n - 1);
    out.conormal_robin.cos[k] = flux_Gamma.cos_coeff(n) - params.q_Gamma * out.trace.cos[k];
    out.conormal_robin.sin[k] = flux_Gamma.sin_coeff(n) - params.q_Gamma * out.trace.sin[k];
  }
  return out;
}

CauchyData SpectralCauchy::sample(const LoopPtr& gamma) const {
  if (gamma->tag != BoundaryTag::Gamma) throw DomainError("SpectralCauchy::sample needs a Gamma loop");
  return make_cauchy(BoundaryField::sample(gamma, [this](double t) { return trace(t); }),
                     BoundaryField::sample(gamma, [this](double t) { return conormal_robin(t); }));
}

}  // namespace robinlab
