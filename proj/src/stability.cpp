#include "robinlab/stability.hpp"

#include "robinlab/errors.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace robinlab {

bool eta_in_theorem_range(double eta) { return eta > 0.0 && eta < 0.25; }

double phi(const PhiParams& params, double r) {
  if (!(r > 0.0)) throw DomainError("phi: r must be positive");
  if (!(params.c > 0.0)) throw DomainError("phi: c must be positive");
  if (r <= std::exp(params.c)) return 1.0 / r;
  return std::pow(std::log(r), -params.eta);
}

// ---------------------------------------------------------------------------
// Geometry

StabilityGeometry::StabilityGeometry(AnnularDomain domain_, MetricTensor metric_, int n_radial,
                                     int n_angular, std::size_t basis_size)
    : domain(std::move(domain_)),
      metric(std::move(metric_)),
      mesh(discretize(domain, metric, n_radial, n_angular)),
      basis(lb_eigenbasis(mesh.inner, basis_size)) {}

ForwardMapSetup StabilityGeometry::setup(NormConvention convention) const {
  ForwardMapSetup s;
  s.mesh = &mesh;
  s.metric = &metric;
  s.domain = &domain;
  s.q_S = q_S;
  s.q_Gamma = q_Gamma;
  s.backend = backend;
  s.norm_convention = convention;
  return s;
}

CauchyData StabilityGeometry::data(const BoundaryField& flux_S) const {
  return forward_flux_data(flux_S, setup());
}

// ---------------------------------------------------------------------------
// Sweeps

double SigmaRow::sigma(NormConvention convention) const {
  switch (convention) {
    case NormConvention::L2: return sigma_l2;
    case NormConvention::HHalf: return sigma_h_half;
    case NormConvention::H1: return sigma_h1;
  }
  return sigma_h1;
}

namespace {

SigmaRow sweep_row(const ForwardMapMatrix& full, std::size_t dimension) {
  const ForwardMapMatrix map = full.leading(dimension);
  SigmaRow row;
  row.dimension = dimension;
  row.order = static_cast<int>((dimension - 1) / 2);
  row.cutoff = map.eigenvalues()[static_cast<Eigen::Index>(dimension - 1)];
  const Eigen::VectorXd l2 = map.singular_values(NormConvention::L2);
  const Eigen::VectorXd h1 = map.singular_values(NormConvention::H1);
  row.sigma_l2 = l2[l2.size() - 1];
  row.sigma_h_half = map.sigma_min(NormConvention::HHalf);
  row.sigma_h1 = h1[h1.size() - 1];
  row.cond_l2 = l2[0] / row.sigma_l2;
  row.cond_h1 = h1[0] / row.sigma_h1;
  return row;
}

std::vector<SigmaRow> sweep_dimensions(const std::vector<std::size_t>& dims,
                                       const StabilityGeometry& geo) {
  if (dims.empty()) return {};
  if (!std::is_sorted(dims.begin(), dims.end())) throw DomainError("sweep grid must be ascending");
  const ForwardMapMatrix full = assemble_forward_map_count(dims.back(), geo.basis, geo.setup());
  std::vector<SigmaRow> rows;
  rows.reserve(dims.size());
  for (std::size_t d : dims) rows.push_back(sweep_row(full, d));
  return rows;
}

}  // namespace

std::vector<SigmaRow> sigma_min_sweep(const std::vector<int>& orders, const StabilityGeometry& geo) {
  std::vector<std::size_t> dims;
  for (int n : orders) {
    if (n < 0) throw DomainError("sigma_min_sweep: mode orders must be >= 0");
    dims.push_back(static_cast<std::size_t>(2 * n + 1));
  }
  return sweep_dimensions(dims, geo);
}

std::vector<SigmaRow> sigma_min_sweep_cutoffs(const std::vector<double>& cutoffs,
                                              const StabilityGeometry& geo) {
  std::vector<std::size_t> dims;
  for (double lambda : cutoffs) {
    const std::size_t d = geo.basis.count_up_to(lambda);
    if (d == geo.basis.size()) {
      throw DomainError("sigma_min_sweep: cutoff exceeds the resolved spectrum");
    }
    dims.push_back(d);
  }
  std::vector<SigmaRow> rows = sweep_dimensions(dims, geo);
  for (std::size_t k = 0; k < rows.size(); ++k) rows[k].cutoff = cutoffs[k];
  return rows;
}

double decay_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("decay_slope: need matching points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(y[k] > 0.0)) throw DomainError("decay_slope: nonpositive sigma");
    mx += x[k];
    my += -std::log(y[k]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (-std::log(y[k]) - my);
    sxx += (x[k] - mx) * (x[k] - mx);
  }
  if (!(sxx > 0.0)) throw DomainError("decay_slope: degenerate abscissae");
  return sxy / sxx;
}

double fit_decay_rate(const std::vector<SigmaRow>& table, NormConvention convention) {
  if (table.size() < 4) throw DomainError("fit_decay_rate: at least 4 rows required");
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t k = table.size() / 2; k < table.size(); ++k) {
    x.push_back(table[k].order);
    y.push_back(table[k].sigma(convention));
  }
  return decay_slope(x, y);
}

// ---------------------------------------------------------------------------
// Logarithmic modulus

std::vector<ModulusSample> modulus_samples(const std::vector<BoundaryField>& family,
                                           const StabilityGeometry& geo) {
  if (family.empty()) throw DomainError("modulus_samples: empty family");
  const FluxForward forward(geo.setup());
  std::vector<ModulusSample> out;
  for (const auto& a : family) {
    ModulusSample s;
    s.l2 = a.l2_norm();
    if (!(s.l2 > 0.0)) throw DomainError("modulus_samples: family members must be nonzero");
    s.h_half = sobolev_norm(a, 0.5, geo.basis);
    s.C = cauchy_C(forward.data(a));
    if (!(s.C > 0.0)) {
      throw UniquenessAlarm("nonzero flux produced vanishing Cauchy data on Gamma");
    }
    out.push_back(s);
  }
  return out;
}

std::vector<double> modulus_c_grid() {
  constexpr int kPoints = 60;
  std::vector<double> grid(kPoints);
  for (int i = 0; i < kPoints; ++i) grid[i] = 0.1 * std::pow(500.0, i / double(kPoints - 1));
  return grid;
}

double best_bold_c(const std::vector<ModulusSample>& samples, double eta, double c) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : samples) {
    if (!(s.l2 > 0.0)) continue;
    if (!(s.C > 0.0)) throw UniquenessAlarm("member with nonzero flux and C(u) = 0");
    const double r = s.h_half / s.C;
    best = std::min(best, phi({eta, c}, r) * s.h_half / s.l2);
  }
  return best;
}

namespace {

struct CFit {
  double c = 0.0;
  double bold_c = 0.0;
};

// Smallest grid c whose optimal bold_c is positive and finite.
CFit fit_c(const std::vector<ModulusSample>& samples, double eta, const std::vector<double>& grid) {
  for (double c : grid) {
    const double b = best_bold_c(samples, eta, c);
    if (b > 0.0 && std::isfinite(b)) return {c, b};
  }
  return {};
}

}  // namespace

LogModulusFit fit_log_modulus(const std::vector<ModulusSample>& samples, double eta,
                              std::size_t truncate_by) {
  if (samples.empty()) throw DomainError("fit_log_modulus: empty family");
  if (!(eta > 0.0)) throw DomainError("fit_log_modulus: eta must be positive");
  LogModulusFit fit;
  fit.eta = eta;
  fit.eta_in_range = eta_in_theorem_range(eta);
  fit.members = samples.size();
  fit.c_grid = modulus_c_grid();
  for (double c : fit.c_grid) fit.bold_c_curve.push_back(best_bold_c(samples, eta, c));

  const CFit full = fit_c(samples, eta, fit.c_grid);
  fit.c = full.c;
  fit.bold_c = full.bold_c;
  for (std::size_t i = 0; i < fit.c_grid.size(); ++i) {
    if (fit.bold_c_curve[i] >= 0.5 * fit.bold_c) fit.c_knee = fit.c_grid[i];
  }

  fit.truncated_members =
      samples.size() > truncate_by ? samples.size() - truncate_by : std::size_t{1};
  const std::vector<ModulusSample> head(samples.begin(),
                                        samples.begin() + static_cast<long>(fit.truncated_members));
  const CFit truncated = fit_c(head, eta, fit.c_grid);
  fit.c_truncated = truncated.c;
  fit.bold_c_truncated = truncated.bold_c;

  const bool finite = fit.c > 0.0 && fit.bold_c > 0.0 && std::isfinite(fit.bold_c);
  fit.stable = finite && truncated.c > 0.0 && std::abs(truncated.c - fit.c) <= 0.2 * fit.c;
  fit.pass = fit.stable;
  return fit;
}

LogModulusFit verify_log_modulus(const std::vector<BoundaryField>& family, double eta,
                                 const StabilityGeometry& geo) {
  return fit_log_modulus(modulus_samples(family, geo), eta);
}

bool InterpolationTable::all() const {
  for (const auto& row : holds) {
    for (bool b : row) {
      if (!b) return false;
    }
  }
  return true;
}

std::vector<std::size_t> InterpolationTable::failing_members() const {
  std::vector<std::size_t> out;
  for (std::size_t m = 0; m < holds.size(); ++m) {
    if (std::find(holds[m].begin(), holds[m].end(), false) != holds[m].end()) out.push_back(m);
  }
  return out;
}

InterpolationTable interpolation_check(const std::vector<ModulusSample>& members,
                                       const std::vector<double>& s_grid, double eta,
                                       double bold_c, double c) {
  for (double s : s_grid) {
    if (!(s >= 1.0)) throw DomainError("interpolation_check: s must be >= 1");
  }
  InterpolationTable table;
  table.s = s_grid;
  for (const auto& m : members) {
    std::vector<bool> row;
    for (double s : s_grid) {
      const double lhs = bold_c * m.l2;
      const double data_term = m.C > 0.0 ? std::exp(c * s) * m.C : 0.0;
      const double rhs = data_term + std::pow(s, -eta) * m.h_half;
      row.push_back(lhs <= rhs * (1.0 + 1e-12));
    }
    table.holds.push_back(std::move(row));
  }
  return table;
}

std::vector<double> log_spaced(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi >= lo) || count < 1) throw DomainError("log_spaced: bad range");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    out[i] = count == 1 ? lo : lo * std::pow(hi / lo, i / double(count - 1));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lipschitz sampling

LipschitzCheck lipschitz_check(double cutoff, double bound, int samples,
                               const StabilityGeometry& geo, std::uint64_t seed) {
  if (samples < 1) throw DomainError("lipschitz_check: at least one sample required");
  LipschitzCheck out;
  out.cutoff = cutoff;
  out.bound = bound;
  const ForwardMapMatrix map = assemble_forward_map(cutoff, geo.basis, geo.setup());
  out.dimension = map.dimension;
  const auto K = static_cast<Eigen::Index>(map.dimension);

  Eigen::VectorXd w(K);
  for (Eigen::Index m = 0; m < K; ++m) w[m] = std::sqrt(1.0 + map.basis.eigenvalues[m]);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(map.weighted(NormConvention::H1), Eigen::ComputeThinV);
  out.sigma_min = svd.singularValues()[K - 1];

  std::vector<Eigen::VectorXd> candidates;
  candidates.push_back(svd.matrixV().col(K - 1).cwiseQuotient(w));
  for (Eigen::Index m = 0; m < K; ++m) candidates.push_back(Eigen::VectorXd::Unit(K, m));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int cap = 10 * samples;
  int drawn = 0;
  out.c_emp = std::numeric_limits<double>::infinity();
  out.c_emp_hilbert = std::numeric_limits<double>::infinity();
  std::size_t next = 0;
  while (out.samples < samples) {
    Eigen::VectorXd coeffs;
    if (next < candidates.size()) {
      coeffs = candidates[next++];
    } else {
      if (drawn >= cap) {
        std::ostringstream os;
        os << "lipschitz_check: only " << out.samples << " of " << samples
           << " samples fell inside A(M) after " << cap << " draws";
        throw DomainError(os.str());
      }
      ++drawn;
      coeffs.resize(K);
      for (Eigen::Index m = 0; m < K; ++m) coeffs[m] = normal(rng);
    }
    const BoundaryField a = map.basis.synthesize(coeffs);
    if (!in_A(a, bound).inside) {
      ++out.rejected;
      continue;
    }
    const double h1 = coeffs.cwiseProduct(w).norm();
    const Eigen::VectorXd v = map.apply(coeffs);
    out.c_emp = std::min(out.c_emp, cauchy_C_from_vector(v) / h1);
    out.c_emp_hilbert = std::min(out.c_emp_hilbert, v.norm() / h1);
    ++out.samples;
  }
  out.pass = out.c_emp > 0.0 && out.c_emp >= 0.99 * out.sigma_min;
  return out;
}

// ---------------------------------------------------------------------------
// Audits

void require_nonnegative_data(const RobinProblem& problem, const Mesh& mesh) {
  if (!std::isfinite(problem.kappa)) {
    throw DomainError("audit: a finite admissibility cap kappa is required");
  }
  bool nonzero = false;
  for (const auto& x : mesh.vertices) {
    const double f = problem.source_at(x);
    if (f < 0.0) throw DomainError("audit: source f must be nonnegative");
    nonzero = nonzero || f > 0.0;
  }
  for (BoundaryTag tag : {BoundaryTag::S, BoundaryTag::Gamma}) {
    const BoundaryLoop& loop = mesh.loop(tag);
    const BoundaryFunction& a = problem.flux(tag);
    for (std::size_t k = 0; k < loop.size(); ++k) {
      const double v = a.at_node(loop, k);
      if (v < 0.0) {
        throw DomainError("audit: flux on " + to_string(tag) + " must be nonnegative");
      }
      nonzero = nonzero || v > 0.0;
      for (int gp = 0; gp < 2; ++gp) {
        if (a.at_gauss(loop, k, gp) < 0.0) {
          throw DomainError("audit: flux on " + to_string(tag) + " must be nonnegative");
        }
      }
    }
  }
  if (!nonzero) throw DomainError("audit: (f, a) must not vanish identically");
}

MaxPrincipleAudit max_principle_audit(const RobinProblem& problem, const Mesh& mesh,
                                      const MetricTensor& metric) {
  require_nonnegative_data(problem, mesh);
  RobinProblem reference = problem;
  reference.q_S = BoundaryFunction::constant(problem.kappa);
  reference.q_Gamma = BoundaryFunction::constant(problem.kappa);
  const ForwardSolution uq = solve_forward(problem, mesh, metric);
  const ForwardSolution uk = solve_forward(reference, mesh, metric);
  MaxPrincipleAudit out;
  out.min_u_q = uq.nodal_values.minCoeff();
  out.min_u_kappa = uk.nodal_values.minCoeff();
  out.min_v = (uq.nodal_values - uk.nodal_values).minCoeff();
  out.pass = out.min_u_q >= out.min_u_kappa - 1e-8 && out.min_u_kappa > 0.0;
  return out;
}

double energy_ratio(const RobinProblem& problem, const Eigen::VectorXd& u, const Mesh& mesh,
                    const MetricTensor& metric) {
  double f2 = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Vec2 bary = (mesh.vertices[tri[0]] + mesh.vertices[tri[1]] + mesh.vertices[tri[2]]) / 3.0;
    const double f = problem.source_at(bary);
    f2 += mesh.volume_weights[t] * f * f;
  }
  double a2 = 0.0;
  for (BoundaryTag tag : {BoundaryTag::S, BoundaryTag::Gamma}) {
    const BoundaryLoop& loop = mesh.loop(tag);
    for (std::size_t e = 0; e < loop.edges.size(); ++e) {
      for (int gp = 0; gp < 2; ++gp) {
        const double a = problem.flux(tag).at_gauss(loop, e, gp);
        a2 += loop.edges[e].weights[gp] * a * a;
      }
    }
  }
  const double data = std::sqrt(f2) + std::sqrt(a2);
  if (!(data > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return domain_h1_norm(u, mesh, metric) / data;
}

EnergyAudit energy_estimate_audit(const std::vector<RobinProblem>& batch, const Mesh& coarse,
                                  const Mesh& fine, const MetricTensor& metric) {
  if (batch.empty()) throw DomainError("energy_estimate_audit: empty batch");
  EnergyAudit out;
  for (const auto& problem : batch) {
    const double rc = energy_ratio(problem, solve_forward(problem, coarse, metric).nodal_values,
                                   coarse, metric);
    if (std::isnan(rc)) {
      ++out.excluded;
      continue;
    }
    const double rf =
        energy_ratio(problem, solve_forward(problem, fine, metric).nodal_values, fine, metric);
    out.ratio_coarse = std::max(out.ratio_coarse, rc);
    out.ratio_fine = std::max(out.ratio_fine, rf);
    ++out.members;
  }
  out.pass = out.members > 0 && std::isfinite(out.ratio_coarse) &&
             std::abs(out.ratio_fine - out.ratio_coarse) <= 0.1 * out.ratio_coarse;
  return out;
}

SupBoundAudit sup_bound_audit(const std::vector<BoundaryFunction>& family, const RobinProblem& base,
                              const Mesh& mesh, const MetricTensor& metric) {
  if (family.empty()) throw DomainError("sup_bound_audit: empty family");
  require_nonnegative_data(base, mesh);
  SupBoundAudit out;
  for (const auto& q : family) {
    RobinProblem p = base;
    p.q_S = q;
    const ForwardSolution sol = solve_forward(p, mesh, metric);
    out.sup_u.push_back(sol.nodal_values.cwiseAbs().maxCoeff());
    out.boundary_sup.push_back(std::max(sol.trace_S.values().cwiseAbs().maxCoeff(),
                                        sol.trace_Gamma.values().cwiseAbs().maxCoeff()));
  }
  out.mean = std::accumulate(out.sup_u.begin(), out.sup_u.end(), 0.0) / double(out.sup_u.size());
  out.smallest = static_cast<std::size_t>(
      std::min_element(out.sup_u.begin(), out.sup_u.end()) - out.sup_u.begin());
  out.pass = std::all_of(out.sup_u.begin(), out.sup_u.end(),
                         [&](double s) { return std::abs(s - out.mean) <= 0.1 * out.mean; });
  return out;
}

std::vector<ModulusSample> corrosion_samples(
    const std::vector<std::pair<BoundaryField, BoundaryField>>& pairs, const RobinProblem& base,
    const Mesh& mesh, const MetricTensor& metric) {
  std::vector<ModulusSample> out;
  for (const auto& [q1, q2] : pairs) {
    RobinProblem p1 = base;
    RobinProblem p2 = base;
    p1.q_S = BoundaryFunction::nodal(q1);
    p2.q_S = BoundaryFunction::nodal(q2);
    const CauchyData d1 = extract_cauchy(solve_forward(p1, mesh, metric), p1);
    const CauchyData d2 = extract_cauchy(solve_forward(p2, mesh, metric), p2);
    ModulusSample s;
    s.l2 = (q1 - q2).l2_norm();
    s.h_half = 1.0;
    s.C = cauchy_C(d1 - d2);
    if (s.l2 > 0.0 && !(s.C > 0.0)) {
      throw UniquenessAlarm("distinct coefficients produced identical Cauchy data");
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace robinlab
