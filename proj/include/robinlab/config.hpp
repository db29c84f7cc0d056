#pragma once

// Experiment configuration: a JSON tree with centralized defaults. Every
// physical precondition is checked at load time and reported with the
// offending field path.

#include "robinlab/forward_fem.hpp"
#include "robinlab/geometry.hpp"
#include "robinlab/spectral.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace robinlab {

/// a0 + sum_n (cos[n-1] cos n theta + sin[n-1] sin n theta). A bare number in
/// the file is a constant.
struct FourierSpec {
  double a0 = 0.0;
  std::vector<double> cos;
  std::vector<double> sin;

  bool is_constant() const;
  bool is_zero() const;
  double operator()(double theta) const;
  FourierSeries series() const;
  BoundaryFunction boundary() const;
  /// Minimum over a fine angular grid.
  double sampled_min() const;
  double sampled_max() const;
};

struct CurveSpec {
  double radius = 1.0;
  std::vector<double> cos;
  std::vector<double> sin;
};

struct MetricSpec {
  std::string kind = "identity";  // identity | constant | conformal_sine
  Mat2 matrix = Mat2::Identity();
  double amplitude = 0.0;
};

struct ExperimentConfig {
  // geometry
  Vec2 center = Vec2::Zero();
  CurveSpec inner{1.0, {}, {}};
  CurveSpec outer{2.0, {}, {}};
  MetricSpec metric;

  // problem data; the source is a function of the polar angle
  FourierSpec source;
  double absorption = 0.0;
  double kappa = 1.0;
  FourierSpec q_S{1.0, {}, {}};
  FourierSpec q_Gamma{1.0, {}, {}};
  FourierSpec flux_S;
  FourierSpec flux_Gamma{1.0, {}, {}};

  // discretization
  int n_radial = 16;
  int n_angular = 160;
  int refinements = 1;

  // inversion
  std::string inversion_backend = "fem";  // spectral | fem
  double cutoff = 25.0;
  double alpha = 0.0;
  double noise = 0.0;
  std::uint64_t seed = 1;
  int max_iterations = 20;
  double tolerance = 1e-8;
  std::string data_file;
  int data_refinement = 2;
  std::optional<FourierSpec> truth_flux_S;
  std::optional<FourierSpec> truth_q_S;

  // stability
  std::string stability_backend = "spectral";
  std::vector<int> orders = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  double eta = 0.125;
  std::vector<int> family = {2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  double lipschitz_cutoff = 25.0;
  double lipschitz_bound = 5.0;
  int lipschitz_samples = 50;
  bool audits = true;

  std::string output = "out";
};

ExperimentConfig default_config();

nlohmann::json to_json(const ExperimentConfig& config);
/// Parses and validates; throws ConfigError naming the field.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const ExperimentConfig& config);

/// Physical preconditions (q >= 0, gap > 0, eta in (0, 1/4), ...).
void validate_config(const ExperimentConfig& config);

AnnularDomain build_domain(const ExperimentConfig& config);
MetricTensor build_metric(const ExperimentConfig& config);
RobinProblem build_problem(const ExperimentConfig& config);
std::function<double(const Vec2&)> build_source(const ExperimentConfig& config);

}  // namespace robinlab
