#include "robinlab/geometry.hpp"
#include "robinlab/spectral.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace robinlab;

namespace {

// 1 / (3/2 + ln 2), from the radial 2x2 system (hand elimination).
constexpr double kRadial = 0.45596575043572046;

}  // namespace

TEST_CASE("radial mode of the benchmark") {
  const ModeCoefficients c = solve_mode(0, AnnulusParams{}, 0.0, 1.0);
  CHECK(c.alpha == doctest::Approx(kRadial).epsilon(1e-14));
  CHECK(c.beta == doctest::Approx(kRadial).epsilon(1e-14));
}

TEST_CASE("zero flux gives the zero mode") {
  for (int n = 0; n < 6; ++n) {
    const ModeCoefficients c = solve_mode(n, AnnulusParams{}, 0.0, 0.0);
    CHECK(c.alpha == 0.0);
    CHECK(c.beta == 0.0);
  }
}

TEST_CASE("mode solutions satisfy both Robin equations") {
  for (int n = 0; n <= 12; ++n) {
    const AnnulusParams p{1.0, 2.0, 0.7, 1.3};
    const ModeCoefficients c = solve_mode(n, p, 1.0, 0.0);
    CHECK(mode_residual(n, p, c, 1.0, 0.0) <= 1e-13);
  }
}

TEST_CASE("second mode against a closed form") {
  // u = A r^2 + B r^-2 with -u'(1) + u(1) = 1 and u'(2) + u(2) = 0 gives
  // A = 0, B = 1/3 (solved symbolically).
  const ModeCoefficients c = solve_mode(2, AnnulusParams{}, 1.0, 0.0);
  CHECK(radial_profile(2, c, 2.0) == doctest::Approx(1.0 / 12.0).epsilon(1e-13));
  CHECK(radial_profile(2, c, 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("Gamma trace decays like 2^-n") {
  double first = 0.0;
  for (int n = 2; n <= 12; ++n) {
    const SpectralCauchy sc =
        spectral_forward(FourierSeries::cosine(n), FourierSeries::constant(0.0), AnnulusParams{});
    const double scaled = std::abs(sc.trace.cos_coeff(n)) * std::pow(2.0, n);
    if (n == 2) first = scaled;
    const double band = 4.0 * (n + 1);
    CHECK(scaled / first <= band);
    CHECK(scaled / first >= 1.0 / band);
  }
}

TEST_CASE("zero flux gives zero data, constant flux only the radial mode") {
  const SpectralCauchy zero =
      spectral_forward(FourierSeries::constant(0.0), FourierSeries::constant(0.0), AnnulusParams{});
  CHECK(zero.trace.a0 == 0.0);
  CHECK(zero.conormal.a0 == 0.0);
  const SpectralCauchy one =
      spectral_forward(FourierSeries::constant(0.0), FourierSeries::constant(1.0), AnnulusParams{});
  for (int n = 1; n <= one.trace.order(); ++n) {
    CHECK(one.trace.cos_coeff(n) == 0.0);
    CHECK(one.trace.sin_coeff(n) == 0.0);
  }
  CHECK(one.trace.a0 == doctest::Approx(kRadial * (1.0 + std::log(2.0))));
}

TEST_CASE("field evaluation") {
  const ModeSolution radial =
      spectral_solve(FourierSeries::constant(0.0), FourierSeries::constant(1.0), AnnulusParams{});
  CHECK(spectral_field(radial, std::sqrt(2.0), 0.4) ==
        doctest::Approx(0.6139914376089302).epsilon(1e-14));

  const ModeSolution m3 =
      spectral_solve(FourierSeries::cosine(3), FourierSeries::constant(0.0), AnnulusParams{});
  for (double t : {0.1, 0.9, 2.0}) {
    CHECK(spectral_field(m3, 1.4, t) ==
          doctest::Approx(spectral_field(m3, 1.4, t + 2.0 * std::numbers::pi / 3.0)).epsilon(1e-12));
  }
}

TEST_CASE("series conormal agrees with the Robin identity") {
  FourierSeries flux_S;
  flux_S.a0 = 0.3;
  flux_S.cos = {0.5, -0.2, 0.1};
  flux_S.sin = {0.0, 0.4};
  FourierSeries flux_G = FourierSeries::cosine(2, 0.7);
  flux_G.a0 = 1.0;
  const SpectralCauchy sc = spectral_forward(flux_S, flux_G, AnnulusParams{1.0, 2.0, 0.6, 1.4});
  CHECK(max_coefficient_difference(sc.conormal, sc.conormal_robin) <= 1e-12);
}

TEST_CASE("Fourier projection of a sampled field") {
  const AnnularDomain d = AnnularDomain::circles(1.0, 2.0);
  const Mesh m = discretize(d, MetricTensor::identity(), 2, 64);
  const BoundaryField f = BoundaryField::sample(
      m.outer, [](double t) { return 0.5 + std::cos(2 * t) - 0.25 * std::sin(5 * t); });
  const FourierSeries s = FourierSeries::from_field(f, 10);
  CHECK(s.a0 == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(s.cos_coeff(2) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.sin_coeff(5) == doctest::Approx(-0.25).epsilon(1e-12));
  CHECK(std::abs(s.cos_coeff(3)) < 1e-12);
}
