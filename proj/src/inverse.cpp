#include "robinlab/inverse.hpp"

#include "robinlab/errors.hpp"
#include "robinlab/spectral.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace robinlab {

namespace {

Eigen::VectorXd sobolev_weights(const Eigen::VectorXd& eigenvalues, double t) {
  Eigen::VectorXd w(eigenvalues.size());
  for (Eigen::Index m = 0; m < w.size(); ++m) w[m] = std::pow(1.0 + eigenvalues[m], 0.5 * t);
  return w;
}

Eigen::VectorXd singular_values_of(const Eigen::MatrixXd& a) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  return svd.singularValues();
}

void require_setup(const ForwardMapSetup& setup) {
  if (setup.mesh == nullptr || setup.metric == nullptr) {
    throw DomainError("forward map: mesh and metric are required");
  }
  if (setup.mesh->metric_tag != setup.metric->tag()) {
    throw GeometryError("forward map: mesh was prepared for metric '" + setup.mesh->metric_tag +
                        "' but '" + setup.metric->tag() + "' was given");
  }
}

AnnulusParams spectral_params(const ForwardMapSetup& setup) {
  if (setup.domain == nullptr || !setup.domain->is_concentric_circles()) {
    throw GeometryError("spectral backend needs concentric circles");
  }
  if (!setup.metric->is_euclidean()) throw GeometryError("spectral backend needs the Euclidean metric");
  if (!setup.q_S.is_constant() || !setup.q_Gamma.is_constant()) {
    throw DomainError("spectral backend needs constant Robin coefficients");
  }
  AnnulusParams p;
  p.inner_radius = setup.domain->inner().mean_radius();
  p.outer_radius = setup.domain->outer().mean_radius();
  p.q_S = setup.q_S.constant_value();
  p.q_Gamma = setup.q_Gamma.constant_value();
  return p;
}

// Cauchy data on Gamma of a nodal solution with zero flux on Gamma.
CauchyData gamma_data(const Eigen::VectorXd& u, const LoopPtr& gamma, const BoundaryField& q_gamma,
                      const BoundaryField& flux_gamma) {
  BoundaryField trace = restrict_to(u, gamma);
  BoundaryField conormal = flux_gamma - hadamard(q_gamma, trace);
  return make_cauchy(std::move(trace), std::move(conormal));
}

CauchyData spectral_data(const BoundaryField& flux_S, const AnnulusParams& params,
                         const LoopPtr& gamma) {
  const int order = static_cast<int>((flux_S.size() - 1) / 2);
  const FourierSeries a = FourierSeries::from_field(flux_S, order);
  return spectral_forward(a, FourierSeries::constant(0.0), params).sample(gamma);
}

}  // namespace

struct FluxForward::Impl {
  ForwardMapSetup setup;
  std::optional<AnnulusParams> params;
  std::unique_ptr<FactoredOperator> op;
  std::optional<BoundaryField> q_gamma;
};

FluxForward::FluxForward(const ForwardMapSetup& setup) : impl_(std::make_unique<Impl>()) {
  require_setup(setup);
  impl_->setup = setup;
  if (setup.backend == ForwardBackend::Spectral) {
    impl_->params = spectral_params(setup);
    return;
  }
  RobinProblem problem;
  problem.q_S = setup.q_S;
  problem.q_Gamma = setup.q_Gamma;
  const LinearSystem system = assemble(problem, *setup.mesh, *setup.metric);
  impl_->op = std::make_unique<FactoredOperator>(system.matrix);
  impl_->q_gamma = setup.q_Gamma.on(setup.mesh->outer);
}

FluxForward::~FluxForward() = default;
FluxForward::FluxForward(FluxForward&&) noexcept = default;
FluxForward& FluxForward::operator=(FluxForward&&) noexcept = default;

CauchyData FluxForward::data(const BoundaryField& flux_S) const {
  const Mesh& mesh = *impl_->setup.mesh;
  if (!same_discretization(flux_S.loop(), *mesh.inner)) {
    throw DomainError("flux does not live on the mesh's inner boundary");
  }
  if (impl_->params) return spectral_data(flux_S, *impl_->params, mesh.outer);
  const Eigen::VectorXd load =
      assemble_boundary_load(mesh, BoundaryTag::S, BoundaryFunction::nodal(flux_S));
  const Eigen::VectorXd u = impl_->op->solve(load);
  return gamma_data(u, mesh.outer, *impl_->q_gamma, BoundaryField::zeros(mesh.outer));
}

double cauchy_C_from_vector(const Eigen::VectorXd& v) {
  if (v.size() % 3 != 0) throw DomainError("data vector length must be a multiple of 3");
  const Eigen::Index n = v.size() / 3;
  return std::sqrt(v.head(2 * n).squaredNorm()) + v.tail(n).norm();
}

double sobolev_order(NormConvention convention) {
  switch (convention) {
    case NormConvention::L2: return 0.0;
    case NormConvention::HHalf: return 0.5;
    case NormConvention::H1: return 1.0;
  }
  return 1.0;
}

std::string to_string(NormConvention convention) {
  switch (convention) {
    case NormConvention::L2: return "L2";
    case NormConvention::HHalf: return "H1/2";
    case NormConvention::H1: return "H1";
  }
  return "H1";
}

std::string to_string(ForwardBackend backend) {
  return backend == ForwardBackend::Spectral ? "spectral" : "fem";
}

// ---------------------------------------------------------------------------
// ForwardMapMatrix

Eigen::VectorXd ForwardMapMatrix::eigenvalues() const {
  return basis.eigenvalues.head(static_cast<Eigen::Index>(dimension));
}

Eigen::MatrixXd ForwardMapMatrix::weighted(NormConvention convention) const {
  const Eigen::VectorXd w = sobolev_weights(eigenvalues(), sobolev_order(convention));
  return columns * w.cwiseInverse().asDiagonal();
}

Eigen::VectorXd ForwardMapMatrix::singular_values(NormConvention convention) const {
  if (dimension == 0) return Eigen::VectorXd();
  return singular_values_of(weighted(convention));
}

double ForwardMapMatrix::sigma_min(NormConvention convention) const {
  const Eigen::VectorXd s = singular_values(convention);
  return s.size() == 0 ? 0.0 : s[s.size() - 1];
}

double ForwardMapMatrix::condition(NormConvention convention) const {
  const Eigen::VectorXd s = singular_values(convention);
  if (s.size() == 0 || !(s[s.size() - 1] > 0.0)) return std::numeric_limits<double>::infinity();
  return s[0] / s[s.size() - 1];
}

ForwardMapMatrix ForwardMapMatrix::leading(std::size_t count) const {
  if (count > dimension) throw DomainError("forward map: fewer columns than requested");
  ForwardMapMatrix out = *this;
  out.columns = columns.leftCols(static_cast<Eigen::Index>(count));
  out.dimension = count;
  return out;
}

// ---------------------------------------------------------------------------
// Assembly

CauchyData forward_flux_data(const BoundaryField& flux_S, const ForwardMapSetup& setup) {
  return FluxForward(setup).data(flux_S);
}

ForwardMapMatrix assemble_forward_map_count(std::size_t count, const EigenBasis& basis,
                                            const ForwardMapSetup& setup) {
  require_setup(setup);
  if (count == 0) throw DomainError("forward map: W_lambda is empty");
  if (count > basis.size()) {
    std::ostringstream os;
    os << "forward map: " << count << " eigenfunctions requested, basis holds " << basis.size();
    throw DomainError(os.str());
  }
  if (!same_discretization(*basis.loop, *setup.mesh->inner)) {
    throw DomainError("forward map: eigenbasis does not live on the mesh's inner boundary");
  }

  ForwardMapMatrix map;
  map.basis = basis;
  map.dimension = count;
  map.norm_convention = setup.norm_convention;
  map.backend = setup.backend;
  map.gamma = setup.mesh->outer;
  const auto rows = static_cast<Eigen::Index>(3 * setup.mesh->outer->size());
  map.columns.resize(rows, static_cast<Eigen::Index>(count));

  const FluxForward forward(setup);
  for (std::size_t m = 0; m < count; ++m) {
    map.columns.col(static_cast<Eigen::Index>(m)) = data_vector(forward.data(basis.function(m)));
  }
  return map;
}

ForwardMapMatrix assemble_forward_map(double cutoff, const EigenBasis& basis,
                                      const ForwardMapSetup& setup) {
  if (!(cutoff >= 0.0)) throw DomainError("forward map: cutoff must be nonnegative");
  if (cutoff > basis.eigenvalues[basis.eigenvalues.size() - 1]) {
    std::ostringstream os;
    os << "forward map: cutoff " << cutoff << " exceeds the resolved spectrum (largest eigenvalue "
       << basis.eigenvalues[basis.eigenvalues.size() - 1] << ")";
    throw DomainError(os.str());
  }
  return assemble_forward_map_count(basis.count_up_to(cutoff), basis, setup);
}

// ---------------------------------------------------------------------------
// Flux inversion

InversionResult invert_flux(const CauchyData& data, const ForwardMapMatrix& map, double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw DomainError("invert_flux: alpha must be finite and nonnegative");
  }
  if (!map.gamma || !same_discretization(data.loop(), *map.gamma)) {
    throw DomainError("invert_flux: data and forward map live on different Gamma discretizations");
  }
  InversionResult out;
  out.sigma_min = map.sigma_min();
  out.condition = map.condition(map.norm_convention);
  if (alpha == 0.0 && !(out.sigma_min > 1e-10)) {
    std::ostringstream os;
    os << "invert_flux: sigma_min = " << out.sigma_min
       << " in the " << to_string(map.norm_convention)
       << " convention; unregularized inversion needs sigma_min > 1e-10";
    throw IllConditionedError(os.str());
  }

  const Eigen::VectorXd d = data_vector(data);
  const Eigen::VectorXd w = sobolev_weights(map.eigenvalues(), 0.5);
  const Eigen::MatrixXd G = map.columns * w.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(G, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd s = svd.singularValues();
  Eigen::VectorXd filter(s.size());
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    const double denom = s[k] * s[k] + alpha;
    filter[k] = denom > 0.0 ? s[k] / denom : 0.0;
  }
  const Eigen::VectorXd b = svd.matrixV() * filter.asDiagonal() * (svd.matrixU().transpose() * d);
  out.coefficients = b.cwiseQuotient(w);
  out.estimate = map.basis.synthesize(out.coefficients);
  out.residual = (map.columns * out.coefficients - d).norm();
  const double dn = d.norm();
  out.relative_residual = dn > 0.0 ? out.residual / dn : out.residual;
  out.iterations = 1;
  out.converged = true;
  return out;
}

CauchyData add_noise(const CauchyData& data, double epsilon, std::uint64_t seed) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw DomainError("add_noise: epsilon must be finite and nonnegative");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto perturb = [&](const BoundaryField& f) {
    Eigen::VectorXd noise(static_cast<Eigen::Index>(f.size()));
    for (Eigen::Index k = 0; k < noise.size(); ++k) noise[k] = normal(rng);
    BoundaryField e(f.loop_ptr(), noise);
    const double en = e.l2_norm();
    const double fn = f.l2_norm();
    if (!(en > 0.0) || !(fn > 0.0)) return f;
    return f + (epsilon * fn / en) * e;
  };
  BoundaryField trace = perturb(data.trace);
  BoundaryField conormal = perturb(data.conormal);
  return make_cauchy(std::move(trace), std::move(conormal));
}

// ---------------------------------------------------------------------------
// Robin coefficient

RobinProblem robin_problem(const RobinSetup& setup, const BoundaryField& q_S) {
  RobinProblem p;
  p.source = setup.source;
  p.q_S = BoundaryFunction::nodal(q_S);
  p.q_Gamma = setup.q_Gamma;
  p.flux_S = setup.flux_S;
  p.flux_Gamma = setup.flux_Gamma;
  p.kappa = setup.kappa;
  return p;
}

namespace {

struct RobinState {
  BoundaryField q;
  std::unique_ptr<FactoredOperator> op;
  Eigen::VectorXd u;
  BoundaryField trace_S;
  CauchyData misfit;  // measured - Cauchy(u)
  double mismatch = 0.0;
};

RobinState evaluate(const RobinSetup& setup, const CauchyData& measured, double data_norm,
                    BoundaryField q) {
  const RobinProblem problem = robin_problem(setup, q);
  const LinearSystem system = assemble(problem, *setup.mesh, *setup.metric);
  auto op = std::make_unique<FactoredOperator>(system.matrix);
  Eigen::VectorXd u = op->solve(system.rhs);
  BoundaryField trace_S = restrict_to(u, setup.mesh->inner);
  const CauchyData model = gamma_data(u, setup.mesh->outer, setup.q_Gamma.on(setup.mesh->outer),
                                      setup.flux_Gamma.on(setup.mesh->outer));
  CauchyData misfit = measured - model;
  const double mismatch = data_vector(misfit).norm() / data_norm;
  return RobinState{std::move(q), std::move(op), std::move(u), std::move(trace_S),
                    std::move(misfit), mismatch};
}

}  // namespace

RobinResult invert_robin(const CauchyData& measured, const RobinSetup& setup,
                         std::optional<BoundaryField> initial) {
  if (setup.mesh == nullptr || setup.metric == nullptr) {
    throw DomainError("invert_robin: mesh and metric are required");
  }
  const Mesh& mesh = *setup.mesh;
  if (!same_discretization(measured.loop(), *mesh.outer)) {
    throw DomainError("invert_robin: measured data must be resampled onto the inversion mesh");
  }
  if (!(setup.kappa > 0.0) || !std::isfinite(setup.kappa)) {
    throw DomainError("invert_robin: kappa must be finite and positive");
  }
  if (setup.max_iterations < 1) throw DomainError("invert_robin: max_iterations must be >= 1");
  const double data_norm = data_vector(measured).norm();
  if (!(data_norm > 0.0)) throw DomainError("invert_robin: measured data vanish");

  const EigenBasis basis = lb_eigenbasis(mesh.inner, mesh.inner->size() / 2);
  const std::size_t count = basis.count_up_to(setup.cutoff);
  if (count == 0) throw DomainError("invert_robin: W_lambda is empty");

  BoundaryField q0 = initial ? *initial : BoundaryField::constant(mesh.inner, 0.5 * setup.kappa);
  if (!same_discretization(q0.loop(), *mesh.inner)) {
    throw DomainError("invert_robin: initial guess does not live on the mesh's inner boundary");
  }

  RobinResult out;
  RobinState state = evaluate(setup, measured, data_norm, std::move(q0));

  for (int k = 1; k <= setup.max_iterations; ++k) {
    const double min_u = state.trace_S.min();
    if (!(min_u > 1e-12)) {
      std::ostringstream os;
      os << "invert_robin: min u on S = " << min_u << " at iteration " << k
         << "; division by the trace is unsafe";
      throw PositivityError(os.str());
    }
    RobinIterate it;
    it.iteration = k;
    it.mismatch = state.mismatch;
    it.min_u_on_S = min_u;
    if (state.mismatch <= setup.tolerance) {
      out.history.push_back(it);
      out.converged = true;
      out.stop_reason = "mismatch below tolerance";
      break;
    }

    // Flux b_k on S reproducing the misfit, with the current coefficient.
    ForwardMapMatrix map;
    map.basis = basis;
    map.dimension = count;
    map.norm_convention = NormConvention::HHalf;
    map.backend = ForwardBackend::Fem;
    map.gamma = mesh.outer;
    map.columns.resize(static_cast<Eigen::Index>(3 * mesh.outer->size()),
                       static_cast<Eigen::Index>(count));
    const BoundaryField q_gamma = setup.q_Gamma.on(mesh.outer);
    const BoundaryField zero_gamma = BoundaryField::zeros(mesh.outer);
    for (std::size_t m = 0; m < count; ++m) {
      const Eigen::VectorXd load =
          assemble_boundary_load(mesh, BoundaryTag::S, BoundaryFunction::nodal(basis.function(m)));
      const Eigen::VectorXd v = state.op->solve(load);
      map.columns.col(static_cast<Eigen::Index>(m)) =
          data_vector(gamma_data(v, mesh.outer, q_gamma, zero_gamma));
    }
    const InversionResult flux = invert_flux(state.misfit, map, setup.alpha);

    Eigen::VectorXd ratio = flux.estimate->values().cwiseQuotient(state.trace_S.values());
    const BoundaryField delta =
        project_W(BoundaryField(mesh.inner, std::move(ratio)), setup.cutoff, basis);

    // Step halving until the mismatch decreases.
    std::optional<RobinState> accepted;
    int contacts = 0;
    double step = 1.0;
    for (int trial = 0; trial <= setup.max_halvings; ++trial, step *= 0.5) {
      Eigen::VectorXd raw = state.q.values() - step * delta.values();
      int touched = 0;
      for (Eigen::Index i = 0; i < raw.size(); ++i) {
        if (raw[i] < 0.0 || raw[i] > setup.kappa) ++touched;
        raw[i] = std::clamp(raw[i], 0.0, setup.kappa);
      }
      RobinState next = evaluate(setup, measured, data_norm, BoundaryField(mesh.inner, raw));
      if (next.mismatch < state.mismatch) {
        accepted = std::move(next);
        contacts = touched;
        break;
      }
    }
    if (!accepted) {
      if (!out.history.empty()) {
        out.history.push_back(it);
        out.converged = true;
        out.stop_reason = "mismatch plateau";
        break;
      }
      std::ostringstream os;
      os << "invert_robin: mismatch " << state.mismatch << " did not decrease after "
         << setup.max_halvings << " step halvings";
      throw StagnationError(os.str());
    }

    it.update_norm = (accepted->q - state.q).l2_norm();
    it.step = step;
    out.history.push_back(it);
    out.clamp_contacts = std::max(out.clamp_contacts, contacts);
    const double improvement = (state.mismatch - accepted->mismatch) / state.mismatch;
    state = std::move(*accepted);
    if (it.update_norm <= 1e-12 * std::max(1.0, state.q.l2_norm())) {
      out.converged = true;
      out.stop_reason = "update below tolerance";
      break;
    }
    if (state.mismatch <= setup.tolerance) {
      out.converged = true;
      out.stop_reason = "mismatch below tolerance";
      break;
    }
    if (improvement < setup.plateau) {
      out.converged = true;
      out.stop_reason = "mismatch plateau";
      break;
    }
  }
  if (out.stop_reason.empty()) out.stop_reason = "iteration cap";
  if (out.clamp_contacts > 0) out.stop_reason += " (clamped at the boundary of [0, kappa])";

  out.mismatch = state.mismatch;
  out.iterations = static_cast<int>(out.history.size());
  out.estimate = std::move(state.q);
  return out;
}

}  // namespace robinlab
