#include "robinlab/boundary.hpp"
#include "robinlab/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace robinlab;
using std::numbers::pi;

namespace {

Mesh ring(double r0, double r1, int n) {
  return discretize(AnnularDomain::circles(r0, r1), MetricTensor::identity(), 2, n);
}

BoundaryField random_band_limited(const EigenBasis& basis, std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t m = 0; m < dim; ++m) c[static_cast<Eigen::Index>(m)] = normal(rng);
  return basis.synthesize(c);
}

}  // namespace

TEST_CASE("Laplace-Beltrami spectrum of the unit circle") {
  const Mesh m = ring(1.0, 2.0, 256);
  const EigenBasis b = lb_eigenbasis(m.inner, 9);
  const double expected[] = {0, 1, 1, 4, 4, 9, 9, 16, 16};
  CHECK(std::abs(b.eigenvalues[0]) < 1e-10);
  for (int k = 1; k < 9; ++k) CHECK(b.eigenvalues[k] == doctest::Approx(expected[k]).epsilon(1e-3));
}

TEST_CASE("radius 2 quarters the spectrum") {
  const EigenBasis b1 = lb_eigenbasis(ring(1.0, 3.0, 128).inner, 9);
  const EigenBasis b2 = lb_eigenbasis(ring(2.0, 3.0, 128).inner, 9);
  for (int k = 1; k < 9; ++k) CHECK(b2.eigenvalues[k] == doctest::Approx(b1.eigenvalues[k] / 4.0).epsilon(1e-10));
}

TEST_CASE("eigenbasis size is limited by the node count") {
  const Mesh m = ring(1.0, 2.0, 16);
  CHECK_THROWS_AS(lb_eigenbasis(m.inner, 9), DomainError);
}

TEST_CASE("spectral Sobolev norms") {
  const Mesh m = ring(1.0, 2.0, 256);
  const EigenBasis b = lb_eigenbasis(m.inner, 64);
  const BoundaryField c = BoundaryField::constant(m.inner, -1.5);
  for (double t : {0.0, 0.25, 0.5, 1.0}) {
    CHECK(sobolev_norm(c, t, b) == doctest::Approx(1.5 * std::sqrt(2.0 * pi)).epsilon(1e-4));
  }
  const BoundaryField c3 = BoundaryField::sample(m.inner, [](double t) { return std::cos(3 * t); });
  CHECK(sobolev_norm(c3, 1.0, b) == doctest::Approx(std::sqrt(10.0 * pi)).epsilon(1e-3));
}

TEST_CASE("tangential derivative") {
  const Mesh m = ring(1.0, 2.0, 256);
  CHECK(tangential_l2_norm(BoundaryField::constant(m.inner, 2.0)) < 1e-12);
  for (int k : {1, 4}) {
    for (double r0 : {1.0, 2.0}) {
      const Mesh mm = ring(r0, r0 + 1.0, 256);
      const BoundaryField f = BoundaryField::sample(mm.inner, [k](double t) { return std::cos(k * t); });
      CHECK(tangential_l2_norm(f) == doctest::Approx(k / r0 * f.l2_norm()).epsilon(2e-3));
    }
  }
}

TEST_CASE("membership in A") {
  const Mesh m = ring(1.0, 2.0, 256);
  const BoundaryField f = BoundaryField::sample(m.inner, [](double t) { return std::cos(3 * t); });
  const AMembership in3 = in_A(f, 3.0);
  CHECK(in3.ratio == doctest::Approx(3.0).epsilon(1e-3));
  CHECK(in3.inside);
  CHECK_FALSE(in_A(f, 2.0).inside);
}

TEST_CASE("projection onto W_lambda") {
  const Mesh m = ring(1.0, 2.0, 128);
  const EigenBasis b = lb_eigenbasis(m.inner, 40);
  const BoundaryField c5 = BoundaryField::sample(m.inner, [](double t) { return std::cos(5 * t); });
  CHECK(project_W(c5, 16.0, b).l2_norm() < 1e-10);

  const BoundaryField mix = BoundaryField::sample(
      m.inner, [](double t) { return 1.0 + std::cos(2 * t) + std::cos(6 * t); });
  const BoundaryField want = BoundaryField::sample(m.inner, [](double t) { return 1.0 + std::cos(2 * t); });
  CHECK((project_W(mix, 16.0, b) - want).l2_norm() < 1e-10);

  const BoundaryField once = project_W(mix, 25.0, b);
  CHECK((project_W(once, 25.0, b) - once).l2_norm() < 1e-10);
}

TEST_CASE("the Cauchy data functional") {
  const Mesh m = ring(1.0, 2.0, 256);
  const CauchyData one = make_cauchy(BoundaryField::constant(m.outer, 1.0), BoundaryField::zeros(m.outer));
  CHECK(cauchy_C(one) == doctest::Approx(std::sqrt(4.0 * pi)).epsilon(1e-4));
  const CauchyData zero = make_cauchy(BoundaryField::zeros(m.outer), BoundaryField::zeros(m.outer));
  CHECK(cauchy_C(zero) == 0.0);

  // Radial benchmark: trace a(1 + ln 2), conormal b / 2 with a = b = 1 / (3/2 + ln 2);
  // the two terms add up to sqrt(4 pi).
  const double a = 0.45596575043572046;
  const CauchyData radial = make_cauchy(BoundaryField::constant(m.outer, a * (1 + std::log(2.0))),
                                        BoundaryField::constant(m.outer, a / 2));
  CHECK(cauchy_C(radial) == doctest::Approx(std::sqrt(4.0 * pi)).epsilon(1e-4));
}

TEST_CASE("data vector carries the Hilbert data norm") {
  const Mesh m = ring(1.0, 2.0, 64);
  const CauchyData d = make_cauchy(
      BoundaryField::sample(m.outer, [](double t) { return std::sin(2 * t) + 0.3; }),
      BoundaryField::sample(m.outer, [](double t) { return std::cos(t); }));
  CHECK(data_vector(d).norm() == doctest::Approx(cauchy_data_norm(d)).epsilon(1e-13));
  CHECK(cauchy_data_norm(d) <= cauchy_C(d));
  CHECK(cauchy_data_norm(d) >= cauchy_C(d) / std::sqrt(2.0));
}

TEST_CASE("multiplication bound probe") {
  const Mesh m = ring(1.0, 2.0, 256);
  const EigenBasis b = lb_eigenbasis(m.inner, 70);
  const MultiplierProbe one = multiplication_bound_probe(BoundaryField::constant(m.inner, 1.0), 5, b, 16);
  CHECK(one.operator_norm == doctest::Approx(1.0).epsilon(1e-12));
  const MultiplierProbe zero = multiplication_bound_probe(BoundaryField::zeros(m.inner), 5, b, 16);
  CHECK(zero.operator_norm == 0.0);
  const BoundaryField q = BoundaryField::sample(m.inner, [](double t) { return std::cos(t); });
  const MultiplierProbe p16 = multiplication_bound_probe(q, 10, b, 16);
  const MultiplierProbe p32 = multiplication_bound_probe(q, 10, b, 32);
  CHECK(std::isfinite(p16.operator_norm));
  CHECK(p32.operator_norm == doctest::Approx(p16.operator_norm).epsilon(0.1));
  CHECK(p32.best_trial <= p32.operator_norm * (1 + 1e-12));
}

TEST_CASE("properties on random band-limited fields") {
  const Mesh m = ring(1.0, 2.0, 128);
  const EigenBasis b = lb_eigenbasis(m.inner, 64);
  std::mt19937_64 rng(19);
  for (double lambda : {4.0, 16.0, 25.0}) {
    const std::size_t dim = b.count_up_to(lambda);
    for (int trial = 0; trial < 50; ++trial) {
      const BoundaryField f = random_band_limited(b, dim, rng);
      // Parseval
      CHECK(b.coefficients(f).squaredNorm() == doctest::Approx(f.l2_norm() * f.l2_norm()).epsilon(1e-8));
      // W_lambda lies in A(sqrt(lambda))
      CHECK(in_A(f, std::sqrt(lambda)).ratio <= std::sqrt(lambda) + 1e-8);
      // norms grow with t
      double prev = 0.0;
      for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        const double n = sobolev_norm(f, t, b);
        CHECK(n >= prev);
        prev = n;
      }
      // interpolation between L2 and H1
      CHECK(sobolev_norm(f, 0.5, b) <=
            std::sqrt(sobolev_norm(f, 0.0, b) * sobolev_norm(f, 1.0, b)) * (1 + 1e-12));
    }
  }
}

TEST_CASE("field arithmetic needs a common loop") {
  const Mesh m = ring(1.0, 2.0, 16);
  CHECK_THROWS_AS(BoundaryField::zeros(m.inner) + BoundaryField::zeros(m.outer), DomainError);
}

TEST_CASE("resampling a smooth field") {
  const Mesh a = ring(1.0, 2.0, 64);
  const Mesh b = ring(1.0, 2.0, 256);
  const BoundaryField f = BoundaryField::sample(b.outer, [](double t) { return std::sin(t); });
  const BoundaryField g = f.resample(a.outer);
  const BoundaryField want = BoundaryField::sample(a.outer, [](double t) { return std::sin(t); });
  CHECK((g - want).l2_norm() < 1e-10);
}
