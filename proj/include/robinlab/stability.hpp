#pragma once

// Empirical side of the stability theorems: singular-value sweeps over
// W_lambda, fitted constants of the logarithmic modulus Phi_{eta,c}, Lipschitz
// sampling, and audits of the maximum principle and the energy estimate.

#include "robinlab/boundary.hpp"
#include "robinlab/forward_fem.hpp"
#include "robinlab/geometry.hpp"
#include "robinlab/inverse.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace robinlab {

struct PhiParams {
  double eta = 0.125;
  double c = 1.0;
};

/// True for 0 < eta < 1/4.
bool eta_in_theorem_range(double eta);

/// Phi_{eta,c}(r) = 1/r for r <= e^c, (log r)^{-eta} for r > e^c.
double phi(const PhiParams& params, double r);

/// Geometry, discretization and forward backend of a stability experiment.
/// The eigenbasis lives on the inner loop of `mesh`.
struct StabilityGeometry {
  AnnularDomain domain;
  MetricTensor metric;
  Mesh mesh;
  EigenBasis basis;
  BoundaryFunction q_S = BoundaryFunction::constant(1.0);
  BoundaryFunction q_Gamma = BoundaryFunction::constant(1.0);
  ForwardBackend backend = ForwardBackend::Spectral;

  StabilityGeometry(AnnularDomain domain, MetricTensor metric, int n_radial, int n_angular,
                    std::size_t basis_size);

  /// Non-owning setup; valid while this object is alive and not moved.
  ForwardMapSetup setup(NormConvention convention = NormConvention::H1) const;
  CauchyData data(const BoundaryField& flux_S) const;
};

struct SigmaRow {
  int order = 0;  // mode order N; W holds the first 2N + 1 eigenfunctions
  double cutoff = 0.0;  // largest eigenvalue in W
  std::size_t dimension = 0;
  double sigma_l2 = 0.0;
  double sigma_h_half = 0.0;
  double sigma_h1 = 0.0;
  double cond_l2 = 0.0;
  double cond_h1 = 0.0;

  double sigma(NormConvention convention) const;
};

/// sigma_min_sweep over mode orders (ascending). One forward map for the
/// largest order, leading columns for the rest.
std::vector<SigmaRow> sigma_min_sweep(const std::vector<int>& orders, const StabilityGeometry& geo);
/// Same over eigenvalue cutoffs lambda (ascending).
std::vector<SigmaRow> sigma_min_sweep_cutoffs(const std::vector<double>& cutoffs,
                                              const StabilityGeometry& geo);

/// Least-squares slope of -ln sigma versus order over the upper half of the table.
double fit_decay_rate(const std::vector<SigmaRow>& table,
                      NormConvention convention = NormConvention::L2);
/// Least-squares slope of -ln y versus x.
double decay_slope(const std::vector<double>& x, const std::vector<double>& y);

/// One family member of the logarithmic-modulus fit: |a|_{L2(S)}, |a|_{H^1/2(S)}
/// and C(u(0, a)). The corrosion echo puts 1 in the H^1/2 slot.
struct ModulusSample {
  double l2 = 0.0;
  double h_half = 0.0;
  double C = 0.0;
};

std::vector<ModulusSample> modulus_samples(const std::vector<BoundaryField>& family,
                                           const StabilityGeometry& geo);

/// The 60-point geometric grid of c on [0.1, 50].
std::vector<double> modulus_c_grid();

/// Largest bold_c such that bold_c |a|_{L2} <= Phi_c(H / C) H for every member.
double best_bold_c(const std::vector<ModulusSample>& samples, double eta, double c);

struct LogModulusFit {
  double eta = 0.0;
  bool eta_in_range = false;
  double c = 0.0;
  double bold_c = 0.0;
  double c_truncated = 0.0;
  double bold_c_truncated = 0.0;
  double c_knee = 0.0;  // largest c keeping at least half of bold_c
  std::size_t members = 0;
  std::size_t truncated_members = 0;
  std::vector<double> c_grid;
  std::vector<double> bold_c_curve;
  bool stable = false;
  bool pass = false;
};

/// Fits (bold_c, c) on the full family and on the family without its last
/// `truncate_by` members; pass iff c moves by at most 20%.
LogModulusFit fit_log_modulus(const std::vector<ModulusSample>& samples, double eta,
                              std::size_t truncate_by = 4);

/// verify_log_modulus: modulus_samples + fit_log_modulus.
LogModulusFit verify_log_modulus(const std::vector<BoundaryField>& family, double eta,
                                 const StabilityGeometry& geo);

struct InterpolationTable {
  std::vector<double> s;
  std::vector<std::vector<bool>> holds;  // [member][s index]
  bool all() const;
  /// Members with at least one false entry.
  std::vector<std::size_t> failing_members() const;
};

/// interpolation_check: bold_c |a|_{L2} <= e^{cs} C + s^{-eta} |a|_{H^1/2} on the grid.
InterpolationTable interpolation_check(const std::vector<ModulusSample>& members,
                                       const std::vector<double>& s_grid, double eta,
                                       double bold_c, double c);

std::vector<double> log_spaced(double lo, double hi, int count);

struct LipschitzCheck {
  double cutoff = 0.0;
  double bound = 0.0;  // M
  std::size_t dimension = 0;
  int samples = 0;
  int rejected = 0;
  double c_emp = 0.0;  // min C(u) / |a|_{H1}
  double c_emp_hilbert = 0.0;  // same with the Hilbert data norm
  double sigma_min = 0.0;  // H1 convention
  bool pass = false;
};

/// lipschitz_check: the smallest right singular vector, every phi_m, then
/// Gaussian combinations in W_lambda, each kept only if it lies in A(M).
LipschitzCheck lipschitz_check(double cutoff, double bound, int samples,
                               const StabilityGeometry& geo, std::uint64_t seed = 11);

struct MaxPrincipleAudit {
  double min_u_q = 0.0;
  double min_u_kappa = 0.0;
  double min_v = 0.0;
  bool pass = false;
};

/// max_principle_audit: u_q against the reference u_kappa with q = kappa on all of dD.
MaxPrincipleAudit max_principle_audit(const RobinProblem& problem, const Mesh& mesh,
                                      const MetricTensor& metric);

/// |u|_{H1(D)} / (|f|_{L2(D)} + |a|_{L2(dD)}); NaN for zero data.
double energy_ratio(const RobinProblem& problem, const Eigen::VectorXd& u, const Mesh& mesh,
                    const MetricTensor& metric);

struct EnergyAudit {
  double ratio_coarse = 0.0;
  double ratio_fine = 0.0;
  std::size_t members = 0;
  std::size_t excluded = 0;
  bool pass = false;
};

/// energy_estimate_audit: worst ratio over the batch on two meshes; pass iff the
/// fine value is within 10% of the coarse one.
EnergyAudit energy_estimate_audit(const std::vector<RobinProblem>& batch, const Mesh& coarse,
                                  const Mesh& fine, const MetricTensor& metric);

struct SupBoundAudit {
  std::vector<double> sup_u;
  std::vector<double> boundary_sup;
  double mean = 0.0;
  std::size_t smallest = 0;
  bool pass = false;
};

/// sup_bound_audit: sup |u_q| over the coefficient family (q replaces q_S of
/// `base`); pass iff every sup lies within 10% of the family mean.
SupBoundAudit sup_bound_audit(const std::vector<BoundaryFunction>& family, const RobinProblem& base,
                              const Mesh& mesh, const MetricTensor& metric);

/// Corrosion echo samples (|q1 - q2|_{L2(S)}, 1, C(u1 - u2)) for coefficient pairs
/// on S with the data of `base`.
std::vector<ModulusSample> corrosion_samples(
    const std::vector<std::pair<BoundaryField, BoundaryField>>& pairs, const RobinProblem& base,
    const Mesh& mesh, const MetricTensor& metric);

/// Guard shared by the audits: f >= 0, fluxes >= 0, (f, a) not identically zero,
/// finite kappa.
void require_nonnegative_data(const RobinProblem& problem, const Mesh& mesh);

}  // namespace robinlab
