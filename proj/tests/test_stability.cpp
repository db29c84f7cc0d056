#include "robinlab/errors.hpp"
#include "robinlab/stability.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace robinlab;

namespace {

StabilityGeometry canonical(double outer = 2.0) {
  return StabilityGeometry(AnnularDomain::circles(1.0, outer), MetricTensor::identity(), 4, 256, 64);
}

std::vector<int> range(int lo, int hi) {
  std::vector<int> v;
  for (int n = lo; n <= hi; ++n) v.push_back(n);
  return v;
}

std::vector<BoundaryField> cosine_family(const StabilityGeometry& geo, int lo, int hi) {
  std::vector<BoundaryField> f;
  for (int n = lo; n <= hi; ++n) {
    f.push_back(BoundaryField::sample(geo.mesh.inner, [n](double t) { return std::cos(n * t); }));
  }
  return f;
}

RobinProblem positive_problem() {
  RobinProblem p;
  p.q_S = BoundaryFunction::constant(1.0);
  p.q_Gamma = BoundaryFunction::constant(1.0);
  p.flux_Gamma = BoundaryFunction::constant(1.0);
  p.kappa = 1.0;
  return p;
}

}  // namespace

TEST_CASE("phi") {
  CHECK(phi({0.2, 1.0}, 1.0) == doctest::Approx(1.0));
  CHECK(phi({0.125, 1.0}, std::exp(2.0)) == doctest::Approx(std::pow(2.0, -0.125)).epsilon(1e-14));
  CHECK(phi({0.125, 1.0}, std::exp(2.0)) == doctest::Approx(0.9170040432).epsilon(1e-9));
  CHECK_THROWS_AS(phi({0.1, 1.0}, 0.0), DomainError);
  CHECK_THROWS_AS(phi({0.1, 1.0}, -1.0), DomainError);

  const PhiParams p{0.125, 1.5};
  double prev = phi(p, 0.5);
  for (double r = 0.6; r < std::exp(1.5); r *= 1.1) {
    CHECK(phi(p, r) <= prev);
    prev = phi(p, r);
  }
  prev = phi(p, std::exp(1.5) * 1.0001);
  for (double r = std::exp(1.5) * 1.1; r < 1e12; r *= 3.0) {
    const double v = phi(p, r);
    CHECK(v <= prev);
    CHECK(v > 0.0);
    prev = v;
  }
  // the jump sits exactly at r = e^c
  const double rc = std::exp(1.5);
  CHECK(phi(p, rc) == doctest::Approx(1.0 / rc));
  CHECK(phi(p, rc * (1 + 1e-12)) == doctest::Approx(std::pow(1.5, -0.125)).epsilon(1e-9));
}

TEST_CASE("theorem range of eta") {
  CHECK(eta_in_theorem_range(0.125));
  CHECK_FALSE(eta_in_theorem_range(0.25));
  CHECK_FALSE(eta_in_theorem_range(0.0));
  CHECK_FALSE(eta_in_theorem_range(0.5));
}

TEST_CASE("sigma_min decreases with the mode order and the gap") {
  const StabilityGeometry geo = canonical();
  const auto table = sigma_min_sweep(range(1, 10), geo);
  for (std::size_t k = 1; k < table.size(); ++k) {
    CHECK(table[k].sigma_h1 < table[k - 1].sigma_h1);
    CHECK(table[k].sigma_l2 < table[k - 1].sigma_l2);
  }
  const StabilityGeometry wide = canonical(3.0);
  const auto wide_table = sigma_min_sweep({6}, wide);
  CHECK(wide_table[0].sigma_h1 < sigma_min_sweep({6}, geo)[0].sigma_h1);
}

TEST_CASE("constant fluxes: sigma_min is the radial data norm") {
  // Unit L2 constant flux on S gives Gamma trace t = (1/2) / (sqrt(2 pi)(3/2 + ln 2))
  // and conormal -t; the Hilbert data norm is sqrt(2) * sqrt(4 pi) |t| = 1 / (3/2 + ln 2).
  const auto table = sigma_min_sweep({0}, canonical());
  CHECK(table[0].dimension == 1);
  CHECK(table[0].sigma_h1 == doctest::Approx(0.45596575043572046).epsilon(1e-4));
}

TEST_CASE("decay slopes") {
  const auto table = sigma_min_sweep(range(0, 12), canonical());
  CHECK(fit_decay_rate(table) == doctest::Approx(std::log(2.0)).epsilon(0.15));
  CHECK(fit_decay_rate(table, NormConvention::H1) == doctest::Approx(std::log(2.0)).epsilon(0.15));

  const StabilityGeometry e(AnnularDomain::circles(1.0, std::exp(1.0)), MetricTensor::identity(), 4,
                            256, 64);
  CHECK(fit_decay_rate(sigma_min_sweep(range(0, 12), e)) == doctest::Approx(1.0).epsilon(0.15));

  std::vector<SigmaRow> flat = table;
  for (auto& row : flat) row.sigma_h1 = row.sigma_l2 = row.sigma_h_half = 0.3;
  CHECK(fit_decay_rate(flat) == doctest::Approx(0.0));

  std::vector<SigmaRow> scaled = table;
  for (auto& row : scaled) row.sigma_l2 *= 10.0;
  CHECK(fit_decay_rate(scaled) == doctest::Approx(fit_decay_rate(table)).epsilon(0.02));

  CHECK_THROWS_AS(fit_decay_rate(std::vector<SigmaRow>(table.begin(), table.begin() + 3)), DomainError);
}

TEST_CASE("logarithmic modulus on the cosine family") {
  const StabilityGeometry geo = canonical();
  const auto samples = modulus_samples(cosine_family(geo, 2, 12), geo);
  const LogModulusFit fit = fit_log_modulus(samples, 0.125);
  CHECK(fit.pass);
  CHECK(fit.eta_in_range);
  CHECK(std::isfinite(fit.bold_c));
  CHECK(fit.bold_c > 0.0);
  CHECK(std::abs(fit.c_truncated - fit.c) <= 0.2 * fit.c);

  const auto table = interpolation_check(samples, log_spaced(1.0, 1e3, 61), 0.125, fit.bold_c, fit.c);
  CHECK(table.all());

  const auto doubled = interpolation_check(samples, log_spaced(1.0, 1e3, 61), 0.125, 2.0 * fit.bold_c, fit.c);
  const auto failing = doubled.failing_members();
  REQUIRE_FALSE(failing.empty());
  CHECK(failing.back() == samples.size() - 1);
}

TEST_CASE("single-member family and out-of-range eta") {
  const StabilityGeometry geo = canonical();
  const auto one = modulus_samples(cosine_family(geo, 3, 3), geo);
  CHECK(fit_log_modulus(one, 0.125).pass);
  const LogModulusFit diag = fit_log_modulus(modulus_samples(cosine_family(geo, 2, 12), geo), 0.5);
  CHECK_FALSE(diag.eta_in_range);
  CHECK(std::isfinite(diag.bold_c));
}

TEST_CASE("zero flux passes the interpolation check") {
  const std::vector<ModulusSample> zero = {ModulusSample{0.0, 0.0, 0.0}};
  CHECK(interpolation_check(zero, log_spaced(1.0, 1e3, 11), 0.125, 1.0, 1.0).all());
}

TEST_CASE("Lipschitz sampling") {
  const StabilityGeometry geo = canonical();
  const LipschitzCheck at25 = lipschitz_check(25.0, 5.0, 50, geo);
  CHECK(at25.c_emp > 0.0);
  CHECK(at25.c_emp_hilbert == doctest::Approx(at25.sigma_min).epsilon(0.01));
  CHECK(at25.c_emp_hilbert >= at25.sigma_min * (1 - 1e-10));
  CHECK(at25.pass);
  const LipschitzCheck at49 = lipschitz_check(49.0, 7.0, 50, geo);
  CHECK(at49.c_emp < at25.c_emp);
}

TEST_CASE("maximum principle audit") {
  const Mesh m = discretize(AnnularDomain::circles(1.0, 2.0), MetricTensor::identity(), 24, 192);
  const MaxPrincipleAudit same = max_principle_audit(positive_problem(), m, MetricTensor::identity());
  CHECK(same.min_u_q == doctest::Approx(same.min_u_kappa));
  CHECK(same.min_u_kappa == doctest::Approx(0.45596575043572046).epsilon(1e-3));

  RobinProblem p = positive_problem();
  p.q_S = BoundaryFunction::angular([](double t) { return 0.5 + 0.3 * std::cos(2 * t); });
  const MaxPrincipleAudit a = max_principle_audit(p, m, MetricTensor::identity());
  CHECK(a.min_v >= -1e-8);
  CHECK(a.pass);

  p.flux_S = BoundaryFunction::angular([](double t) { return std::cos(t); });
  CHECK_THROWS_AS(max_principle_audit(p, m, MetricTensor::identity()), DomainError);
}

TEST_CASE("energy estimate audit") {
  const MetricTensor g = MetricTensor::identity();
  const Mesh coarse = discretize(AnnularDomain::circles(1.0, 2.0), g, 8, 64);
  const Mesh fine = discretize(AnnularDomain::circles(1.0, 2.0), g, 16, 128);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<RobinProblem> batch;
  for (int k = 0; k < 20; ++k) {
    const double a = normal(rng), b = normal(rng), c = normal(rng);
    RobinProblem p = positive_problem();
    p.flux_S = BoundaryFunction::angular([a, b, c](double t) { return a + b * std::cos(t) + c * std::sin(3 * t); });
    p.flux_Gamma = BoundaryFunction::constant(0.0);
    batch.push_back(p);
  }
  RobinProblem empty = positive_problem();
  empty.flux_Gamma = BoundaryFunction::constant(0.0);
  batch.push_back(empty);
  const EnergyAudit audit = energy_estimate_audit(batch, coarse, fine, g);
  CHECK(audit.excluded == 1);
  CHECK(std::isfinite(audit.ratio_coarse));
  CHECK(audit.pass);

  const RobinProblem& p = batch.front();
  RobinProblem twice = p;
  twice.flux_S = BoundaryFunction::nodal(2.0 * p.flux_S.on(coarse.inner));
  RobinProblem once = p;
  once.flux_S = BoundaryFunction::nodal(p.flux_S.on(coarse.inner));
  const double r1 = energy_ratio(once, solve_forward(once, coarse, g).nodal_values, coarse, g);
  const double r2 = energy_ratio(twice, solve_forward(twice, coarse, g).nodal_values, coarse, g);
  CHECK(r2 == doctest::Approx(r1).epsilon(1e-10));
}

TEST_CASE("sup bound audit") {
  const MetricTensor g = MetricTensor::identity();
  const Mesh m = discretize(AnnularDomain::circles(1.0, 2.0), g, 16, 128);
  const std::vector<BoundaryFunction> family = {
      BoundaryFunction::constant(0.2), BoundaryFunction::constant(1.0),
      BoundaryFunction::angular([](double t) { return 0.5 + 0.3 * std::cos(2 * t); })};
  const SupBoundAudit a = sup_bound_audit(family, positive_problem(), m, g);
  CHECK(a.pass);
  CHECK(a.smallest == 1);

  RobinProblem doubled = positive_problem();
  doubled.flux_Gamma = BoundaryFunction::constant(2.0);
  const SupBoundAudit b = sup_bound_audit(family, doubled, m, g);
  for (std::size_t k = 0; k < family.size(); ++k) {
    CHECK(b.sup_u[k] == doctest::Approx(2.0 * a.sup_u[k]).epsilon(1e-10));
  }
}

TEST_CASE("corrosion stability echo") {
  const MetricTensor g = MetricTensor::identity();
  const Mesh m = discretize(AnnularDomain::circles(1.0, 2.0), g, 12, 96);
  const BoundaryField q0 = BoundaryField::constant(m.inner, 0.5);
  std::vector<std::pair<BoundaryField, BoundaryField>> pairs;
  for (int k = 0; k <= 5; ++k) {
    pairs.emplace_back(q0, q0 + BoundaryField::sample(m.inner, [k](double t) { return 0.2 * std::cos(k * t); }));
  }
  const auto samples = corrosion_samples(pairs, positive_problem(), m, g);
  CHECK(samples.size() == pairs.size());
  for (const auto& s : samples) CHECK(s.C > 0.0);
  const LogModulusFit fit = fit_log_modulus(samples, 0.125, 2);
  CHECK(fit.pass);
  CHECK(std::isfinite(fit.bold_c));

  std::vector<std::pair<BoundaryField, BoundaryField>> same = {{q0, q0}};
  const auto trivial = corrosion_samples(same, positive_problem(), m, g);
  CHECK(trivial[0].l2 == 0.0);
  CHECK(trivial[0].C == 0.0);
}
