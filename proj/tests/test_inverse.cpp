#include "robinlab/errors.hpp"
#include "robinlab/inverse.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace robinlab;

namespace {

struct Setup {
  AnnularDomain domain = AnnularDomain::circles(1.0, 2.0);
  MetricTensor metric = MetricTensor::identity();
  Mesh mesh;
  EigenBasis basis;
  ForwardMapSetup map_setup;

  Setup(int nr, int na, ForwardBackend backend = ForwardBackend::Spectral)
      : mesh(discretize(domain, metric, nr, na)), basis(lb_eigenbasis(mesh.inner, na / 2)) {
    map_setup.mesh = &mesh;
    map_setup.metric = &metric;
    map_setup.domain = &domain;
    map_setup.backend = backend;
  }
  Setup(const Setup&) = delete;
};

RobinProblem corrosion_truth(std::function<double(double)> q, double kappa = 1.0) {
  RobinProblem p;
  p.q_S = BoundaryFunction::angular(std::move(q));
  p.q_Gamma = BoundaryFunction::constant(1.0);
  p.flux_Gamma = BoundaryFunction::constant(1.0);
  p.kappa = kappa;
  return p;
}

CauchyData fine_data(const RobinProblem& truth, const Mesh& coarse) {
  const Mesh fine = discretize(AnnularDomain::circles(1.0, 2.0), MetricTensor::identity(), 32, 256);
  return resample(extract_cauchy(solve_forward(truth, fine, MetricTensor::identity()), truth),
                  coarse.outer);
}

RobinSetup robin_setup(const Mesh& mesh, const MetricTensor& metric) {
  RobinSetup s;
  s.mesh = &mesh;
  s.metric = &metric;
  s.cutoff = 4.0;
  return s;
}

}  // namespace

TEST_CASE("forward map dimension") {
  Setup s(4, 128);
  const ForwardMapMatrix map = assemble_forward_map(9.0, s.basis, s.map_setup);
  CHECK(map.dimension == 7);
  CHECK(map.columns.cols() == 7);
}

TEST_CASE("spectral and FEM forward maps agree") {
  Setup spectral(80, 800);
  Setup fem(80, 800, ForwardBackend::Fem);
  const ForwardMapMatrix a = assemble_forward_map(9.0, spectral.basis, spectral.map_setup);
  const ForwardMapMatrix b = assemble_forward_map(9.0, fem.basis, fem.map_setup);
  REQUIRE(a.dimension == b.dimension);
  for (Eigen::Index j = 0; j < a.columns.cols(); ++j) {
    CHECK((a.columns.col(j) - b.columns.col(j)).norm() <= 1e-3 * a.columns.col(j).norm());
  }
}

TEST_CASE("exact recovery on a finite subspace") {
  Setup s(4, 256);
  s.map_setup.norm_convention = NormConvention::L2;
  const ForwardMapMatrix map = assemble_forward_map(25.0, s.basis, s.map_setup);
  const BoundaryField truth =
      BoundaryField::sample(s.mesh.inner, [](double t) { return std::cos(2 * t) - 0.5 * std::sin(t); });
  const CauchyData data = forward_flux_data(truth, s.map_setup);
  const InversionResult r = invert_flux(data, map, 0.0);
  CHECK((*r.estimate - truth).l2_norm() <= 1e-6 * truth.l2_norm());
  CHECK(r.relative_residual < 1e-10);

  const CauchyData zero = scale(data, 0.0);
  CHECK(invert_flux(zero, map, 0.0).estimate->l2_norm() == 0.0);

  const double eps = 1e-3;
  const InversionResult noisy = invert_flux(add_noise(data, eps, 4), map, 0.0);
  CHECK((*noisy.estimate - truth).l2_norm() <= 10.0 * map.condition(NormConvention::L2) * eps * truth.l2_norm());
}

TEST_CASE("linear consistency across cutoffs") {
  Setup s(4, 256);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double lambda : {1.0, 4.0, 9.0, 16.0, 25.0}) {
    const ForwardMapMatrix map = assemble_forward_map(lambda, s.basis, s.map_setup);
    for (int trial = 0; trial < 5; ++trial) {
      Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.basis.size()));
      for (std::size_t m = 0; m < map.dimension; ++m) c[static_cast<Eigen::Index>(m)] = normal(rng);
      const BoundaryField a = s.basis.synthesize(c);
      const InversionResult r = invert_flux(forward_flux_data(a, s.map_setup), map, 0.0);
      CHECK((*r.estimate - a).l2_norm() <= 1e-6 * a.l2_norm());
    }
  }
}

TEST_CASE("Tikhonov weight shrinks the estimate") {
  Setup s(4, 256);
  const ForwardMapMatrix map = assemble_forward_map(25.0, s.basis, s.map_setup);
  const BoundaryField a = BoundaryField::sample(s.mesh.inner, [](double t) { return std::cos(5 * t); });
  const CauchyData d = forward_flux_data(a, s.map_setup);
  const double n0 = invert_flux(d, map, 0.0).estimate->l2_norm();
  const double n1 = invert_flux(d, map, 1e-4).estimate->l2_norm();
  const double n2 = invert_flux(d, map, 1e-2).estimate->l2_norm();
  CHECK(n1 < n0);
  CHECK(n2 < n1);
  CHECK_THROWS_AS(invert_flux(d, map, -1.0), DomainError);
}

TEST_CASE("an ill-conditioned map needs regularization") {
  Setup s(2, 256);
  const ForwardMapMatrix map = assemble_forward_map(1600.0, s.basis, s.map_setup);
  const BoundaryField a = BoundaryField::sample(s.mesh.inner, [](double t) { return std::cos(t); });
  const CauchyData d = forward_flux_data(a, s.map_setup);
  CHECK_THROWS_AS(invert_flux(d, map, 0.0), IllConditionedError);
  CHECK_NOTHROW(invert_flux(d, map, 1e-8));
}

TEST_CASE("noise model") {
  Setup s(2, 64);
  const BoundaryField a = BoundaryField::sample(s.mesh.inner, [](double t) { return 1.0 + std::cos(t); });
  const CauchyData d = forward_flux_data(a, s.map_setup);
  const CauchyData same = add_noise(d, 0.0, 1);
  CHECK(same.trace.values() == d.trace.values());
  CHECK(same.conormal.values() == d.conormal.values());

  const CauchyData n1 = add_noise(d, 1e-2, 9);
  const CauchyData n1b = add_noise(d, 1e-2, 9);
  const CauchyData n2 = add_noise(d, 1e-2, 10);
  CHECK(n1.trace.values() == n1b.trace.values());
  CHECK((n1.trace - n2.trace).l2_norm() > 0.0);
  const double rel = (n1.trace - d.trace).l2_norm() / d.trace.l2_norm();
  CHECK(rel >= 0.9e-2);
  CHECK(rel <= 1.1e-2);
  const double rel_c = (n1.conormal - d.conormal).l2_norm() / d.conormal.l2_norm();
  CHECK(rel_c >= 0.9e-2);
  CHECK(rel_c <= 1.1e-2);
}

TEST_CASE("corrosion coefficient reconstruction") {
  const MetricTensor g = MetricTensor::identity();
  const Mesh mesh = discretize(AnnularDomain::circles(1.0, 2.0), g, 16, 128);
  auto q_true = [](double t) { return 0.5 + 0.3 * std::cos(2 * t); };
  const CauchyData data = fine_data(corrosion_truth(q_true), mesh);
  const RobinSetup setup = robin_setup(mesh, g);
  const RobinResult r = invert_robin(data, setup);
  const BoundaryField want = BoundaryField::sample(mesh.inner, q_true);
  CHECK((*r.estimate - want).l2_norm() <= 0.05 * want.l2_norm());
  CHECK(r.iterations <= 20);
  CHECK(r.converged);
  CHECK_FALSE(r.boundary_contact());
  for (std::size_t k = 1; k < r.history.size(); ++k) {
    CHECK(r.history[k].mismatch <= r.history[k - 1].mismatch);
  }
  // q - q0 stays in W_lambda
  const EigenBasis basis = lb_eigenbasis(mesh.inner, 64);
  const BoundaryField shift = *r.estimate - BoundaryField::constant(mesh.inner, 0.5);
  CHECK((project_W(shift, setup.cutoff, basis) - shift).l2_norm() <= 1e-10 * shift.l2_norm());
}

TEST_CASE("the starting guess is a fixed point when it is the truth") {
  const MetricTensor g = MetricTensor::identity();
  const Mesh mesh = discretize(AnnularDomain::circles(1.0, 2.0), g, 12, 96);
  const RobinSetup setup = robin_setup(mesh, g);
  const RobinProblem truth = robin_problem(setup, BoundaryField::constant(mesh.inner, 0.5));
  const CauchyData data = extract_cauchy(solve_forward(truth, mesh, g), truth);
  const RobinResult r = invert_robin(data, setup);
  CHECK(r.converged);
  CHECK(r.iterations == 1);
  REQUIRE(r.history.size() == 1);
  CHECK(r.history[0].update_norm == 0.0);
}

TEST_CASE("clamping engages for a coefficient above the cap") {
  const MetricTensor g = MetricTensor::identity();
  const Mesh mesh = discretize(AnnularDomain::circles(1.0, 2.0), g, 12, 96);
  const CauchyData data = fine_data(corrosion_truth([](double) { return 1.6; }, 2.0), mesh);
  RobinSetup setup = robin_setup(mesh, g);
  setup.cutoff = 0.5;
  const RobinResult r = invert_robin(data, setup);
  CHECK(r.boundary_contact());
  CHECK(r.estimate->max() <= 1.0);
  CHECK(r.stop_reason.find("clamp") != std::string::npos);
}

TEST_CASE("bridge identity for two coefficients") {
  // v = u1 - u2 solves the q1 problem with flux (q2 - q1) u2 on S and nothing else.
  const MetricTensor g = MetricTensor::identity();
  const Mesh mesh = discretize(AnnularDomain::circles(1.0, 2.0), g, 16, 128);
  const RobinProblem p1 = corrosion_truth([](double t) { return 0.5 + 0.3 * std::cos(2 * t); });
  const RobinProblem p2 = corrosion_truth([](double t) { return 0.4 + 0.2 * std::sin(t); });
  const ForwardSolution u1 = solve_forward(p1, mesh, g);
  const ForwardSolution u2 = solve_forward(p2, mesh, g);
  const BoundaryField dq = p2.q_S.on(mesh.inner) - p1.q_S.on(mesh.inner);
  RobinProblem bridge;
  bridge.q_S = p1.q_S;
  bridge.q_Gamma = p1.q_Gamma;
  bridge.flux_S = BoundaryFunction::nodal(hadamard(dq, u2.trace_S));
  const Eigen::VectorXd w = solve_forward(bridge, mesh, g).nodal_values;
  const Eigen::VectorXd v = u1.nodal_values - u2.nodal_values;
  CHECK((w - v).norm() <= 1e-2 * v.norm());
}

TEST_CASE("Robin inversion input checks") {
  const MetricTensor g = MetricTensor::identity();
  const Mesh mesh = discretize(AnnularDomain::circles(1.0, 2.0), g, 8, 64);
  const Mesh other = discretize(AnnularDomain::circles(1.0, 2.0), g, 8, 32);
  const RobinSetup setup = robin_setup(mesh, g);
  const CauchyData foreign = make_cauchy(BoundaryField::constant(other.outer, 1.0),
                                         BoundaryField::constant(other.outer, 0.1));
  CHECK_THROWS_AS(invert_robin(foreign, setup), DomainError);
  const CauchyData zero = make_cauchy(BoundaryField::zeros(mesh.outer), BoundaryField::zeros(mesh.outer));
  CHECK_THROWS_AS(invert_robin(zero, setup), DomainError);
}
