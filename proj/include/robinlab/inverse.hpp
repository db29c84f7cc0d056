#pragma once

// Reconstruction on the inaccessible boundary S from Cauchy data on Gamma:
// linear flux inversion on W_lambda and the fixed-point iteration for the
// Robin (corrosion) coefficient q on S.

#include "robinlab/boundary.hpp"
#include "robinlab/forward_fem.hpp"
#include "robinlab/geometry.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace robinlab {

/// Which H^t(S) norm measures the flux: t = 0, 1/2 or 1.
enum class NormConvention { L2, HHalf, H1 };
double sobolev_order(NormConvention convention);
std::string to_string(NormConvention convention);

enum class ForwardBackend { Spectral, Fem };
std::string to_string(ForwardBackend backend);

/// Discretized flux-to-data map on W_lambda. Column m holds data_vector() of the
/// Cauchy data produced by the flux phi_m on S (zero flux on Gamma, f = 0).
/// In coefficient space the flux norm is the Euclidean norm of
/// (1 + lambda_m)^{t/2} c_m, so the weighted matrix has 2-norm equal to the
/// map norm from H^t(S) into the Hilbert data norm.
struct ForwardMapMatrix {
  Eigen::MatrixXd columns;
  EigenBasis basis;
  std::size_t dimension = 0;
  NormConvention norm_convention = NormConvention::H1;
  ForwardBackend backend = ForwardBackend::Spectral;
  LoopPtr gamma;

  Eigen::VectorXd eigenvalues() const;
  Eigen::MatrixXd weighted(NormConvention convention) const;
  Eigen::VectorXd singular_values(NormConvention convention) const;
  double sigma_min(NormConvention convention) const;
  double sigma_min() const { return sigma_min(norm_convention); }
  double condition(NormConvention convention) const;
  /// Leading `count` columns.
  ForwardMapMatrix leading(std::size_t count) const;
  /// Data vector of F applied to coefficients.
  Eigen::VectorXd apply(const Eigen::VectorXd& coeffs) const { return columns * coeffs; }
};

/// Boundary setting shared by forward-map assembly and the Robin iteration.
struct ForwardMapSetup {
  const Mesh* mesh = nullptr;
  const MetricTensor* metric = nullptr;
  const AnnularDomain* domain = nullptr;  // required by the spectral backend
  BoundaryFunction q_S = BoundaryFunction::constant(1.0);
  BoundaryFunction q_Gamma = BoundaryFunction::constant(1.0);
  ForwardBackend backend = ForwardBackend::Spectral;
  NormConvention norm_convention = NormConvention::H1;
};

/// assemble_forward_map: one forward solve per eigenfunction with lambda_m <= cutoff.
ForwardMapMatrix assemble_forward_map(double cutoff, const EigenBasis& basis,
                                      const ForwardMapSetup& setup);
/// Same, for the first `count` eigenfunctions.
ForwardMapMatrix assemble_forward_map_count(std::size_t count, const EigenBasis& basis,
                                            const ForwardMapSetup& setup);

/// Cauchy data of fluxes on S (zero flux on Gamma, f = 0) with the backend of
/// `setup`. The FEM backend factors the system once.
class FluxForward {
 public:
  explicit FluxForward(const ForwardMapSetup& setup);
  ~FluxForward();
  FluxForward(FluxForward&&) noexcept;
  FluxForward& operator=(FluxForward&&) noexcept;

  CauchyData data(const BoundaryField& flux_S) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

CauchyData forward_flux_data(const BoundaryField& flux_S, const ForwardMapSetup& setup);

/// C(w) from a data_vector: the blocks are (trace, tangential, conormal).
double cauchy_C_from_vector(const Eigen::VectorXd& v);

struct InversionResult {
  std::optional<BoundaryField> estimate;
  Eigen::VectorXd coefficients;
  double residual = 0.0;  // |F a - d| in the data norm
  double relative_residual = 0.0;
  double sigma_min = 0.0;  // in the map's norm convention
  double condition = 0.0;  // in the map's norm convention
  int iterations = 0;
  bool converged = false;
};

/// invert_flux: argmin |F a - d|^2 + alpha |a|^2_{H^1/2(S)} over W_lambda by SVD.
InversionResult invert_flux(const CauchyData& data, const ForwardMapMatrix& map, double alpha);

/// add_noise: i.i.d. Gaussian perturbation of trace and conormal, each rescaled
/// to relative L2(Gamma) size epsilon. Deterministic per seed.
CauchyData add_noise(const CauchyData& data, double epsilon, std::uint64_t seed);

struct RobinSetup {
  const Mesh* mesh = nullptr;
  const MetricTensor* metric = nullptr;
  std::function<double(const Vec2&)> source;
  BoundaryFunction flux_S;
  BoundaryFunction flux_Gamma = BoundaryFunction::constant(1.0);
  BoundaryFunction q_Gamma = BoundaryFunction::constant(1.0);  // known
  double kappa = 1.0;
  double cutoff = 9.0;  // lambda of W_lambda
  int max_iterations = 20;
  double tolerance = 1e-8;  // relative data mismatch
  double plateau = 1e-3;  // stop once an accepted step improves the mismatch by less
  double alpha = 0.0;  // Tikhonov weight of the inner flux inversion
  int max_halvings = 5;
};

struct RobinIterate {
  int iteration = 0;
  double mismatch = 0.0;  // relative, before the update
  double update_norm = 0.0;  // |q_{k+1} - q_k|_{L2(S)}
  double min_u_on_S = 0.0;
  double step = 0.0;
};

struct RobinResult {
  std::optional<BoundaryField> estimate;
  std::vector<RobinIterate> history;
  double mismatch = 0.0;  // relative mismatch of the estimate
  int iterations = 0;
  bool converged = false;
  int clamp_contacts = 0;  // nodes where [0, kappa] clamping engaged
  bool boundary_contact() const { return clamp_contacts > 0; }
  std::string stop_reason;
};

/// invert_robin: fixed-point iteration q_{k+1} = clamp(q_k - P_W(b_k / u_k|_S), 0, kappa),
/// where b_k in W_lambda is the flux whose data match measured - Cauchy(u_k).
/// `measured` must live on the Gamma loop of setup.mesh.
RobinResult invert_robin(const CauchyData& measured, const RobinSetup& setup,
                         std::optional<BoundaryField> initial = std::nullopt);

/// Forward problem with Robin coefficient q on S for a RobinSetup.
RobinProblem robin_problem(const RobinSetup& setup, const BoundaryField& q_S);

}  // namespace robinlab
