#pragma once

// Separation-of-variables solutions for concentric circles R0 < R1, Euclidean
// metric, p = 0, f = 0 and constant Robin coefficients. Each Fourier mode
// decouples:
//   u_0 = alpha_0 + beta_0 ln r,
//   u_n = (alpha_n r^n + beta_n r^-n) {cos, sin}(n theta),   n >= 1,
// with the Robin conditions -u_r + q_S u = a_S at r = R0 and
// u_r + q_Gamma u = a_Gamma at r = R1.

#include "robinlab/boundary.hpp"
#include "robinlab/geometry.hpp"

#include <vector>

namespace robinlab {

/// Truncated real Fourier series a0 + sum_{n=1}^N (c_n cos n theta + s_n sin n theta).
struct FourierSeries {
  double a0 = 0.0;
  std::vector<double> cos;  // cos[n - 1] multiplies cos(n theta)
  std::vector<double> sin;  // sin[n - 1] multiplies sin(n theta)

  int order() const;
  double operator()(double theta) const;
  double cos_coeff(int n) const;
  double sin_coeff(int n) const;

  static FourierSeries constant(double value);
  static FourierSeries cosine(int n, double amplitude = 1.0);
  static FourierSeries sine(int n, double amplitude = 1.0);
  /// Coefficients up to `order` from nodal samples of a loop (trapezoidal in
  /// angle; exact for trigonometric polynomials of degree < n/2 on uniform grids).
  static FourierSeries from_field(const BoundaryField& field, int order);
};

struct AnnulusParams {
  double inner_radius = 1.0;
  double outer_radius = 2.0;
  double q_S = 1.0;
  double q_Gamma = 1.0;
};

struct ModeCoefficients {
  double alpha = 0.0;
  double beta = 0.0;
};

/// solve_mode: the 2x2 Robin system of mode n for the two flux coefficients.
ModeCoefficients solve_mode(int n, const AnnulusParams& params, double flux_S, double flux_Gamma);

/// Residuals of both Robin equations for a mode, relative to the flux scale.
double mode_residual(int n, const AnnulusParams& params, const ModeCoefficients& c, double flux_S,
                     double flux_Gamma);

/// Radial profile R_n(r) and its derivative for unit coefficients.
double radial_profile(int n, const ModeCoefficients& c, double r);
double radial_profile_derivative(int n, const ModeCoefficients& c, double r);

class ModeSolution {
 public:
  ModeSolution(AnnulusParams params, std::vector<ModeCoefficients> cos_modes,
               std::vector<ModeCoefficients> sin_modes);

  const AnnulusParams& params() const { return params_; }
  int order() const { return static_cast<int>(cos_.size()) - 1; }
  const ModeCoefficients& cos_mode(int n) const { return cos_[static_cast<std::size_t>(n)]; }
  const ModeCoefficients& sin_mode(int n) const { return sin_[static_cast<std::size_t>(n)]; }

  /// Series value without the annulus check (harmonic extension).
  double value(double r, double theta) const;
  double radial_derivative(double r, double theta) const;
  double angular_derivative(double r, double theta) const;
  double operator()(const Vec2& x) const;
  Vec2 gradient(const Vec2& x) const;

 private:
  AnnulusParams params_;
  std::vector<ModeCoefficients> cos_;
  std::vector<ModeCoefficients> sin_;
};

ModeSolution spectral_solve(const FourierSeries& flux_S, const FourierSeries& flux_Gamma,
                            const AnnulusParams& params);

/// spectral_field: pointwise value, R0 <= r <= R1 enforced.
double spectral_field(const ModeSolution& solution, double r, double theta);

/// Cauchy data on Gamma as Fourier series. `conormal` is u_r(R1, .) from the
/// series; `conormal_robin` is a_Gamma - q_Gamma u(R1, .).
struct SpectralCauchy {
  FourierSeries trace;
  FourierSeries conormal;
  FourierSeries conormal_robin;

  /// Nodal Cauchy data at the nodes of a Gamma loop.
  CauchyData sample(const LoopPtr& gamma) const;
};

SpectralCauchy spectral_forward(const FourierSeries& flux_S, const FourierSeries& flux_Gamma,
                                const AnnulusParams& params);

/// Max coefficient difference between two series.
double max_coefficient_difference(const FourierSeries& a, const FourierSeries& b);

}  // namespace robinlab
