#pragma once

// Config-driven runs behind the command-line subcommands. Each run validates
// its inputs and the output directory before solving, then writes its files
// in one pass at the end.

#include "robinlab/config.hpp"
#include "robinlab/report.hpp"
#include "robinlab/stability.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace robinlab {

struct Verdict {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct RunSummary {
  std::vector<std::filesystem::path> files;
  std::vector<NamedValue> values;
  std::vector<Verdict> verdicts;

  /// Value of a summary row, throws if missing.
  std::string value(const std::string& name) const;
};

/// True when the separated-variables oracle applies: concentric circles,
/// Euclidean metric, constant q on both boundaries, f = 0 and p = 0.
bool spectral_oracle_applies(const ExperimentConfig& config);

/// solution.csv, cauchy.csv, summary.csv; convergence.csv when refinements > 1;
/// Fourier dumps when the oracle applies.
RunSummary run_forward(const ExperimentConfig& config);

/// estimate.csv, iterations.csv, eigenvalues.csv, summary.csv.
RunSummary run_invert_flux(const ExperimentConfig& config);

/// estimate.csv, iterations.csv, summary.csv.
RunSummary run_invert_robin(const ExperimentConfig& config);

struct StabilityReport {
  std::vector<SigmaRow> sigma_table;
  std::optional<double> decay_slope_h1;
  std::optional<double> decay_slope_l2;
  std::vector<ModulusSample> samples;
  std::optional<LogModulusFit> fit;
  std::vector<AuditRow> audits;
  std::vector<Verdict> verdicts;
  std::vector<std::filesystem::path> files;
};

/// sweep.csv, fit.csv, audits.csv, sweep.svg.
StabilityReport run_stability(const ExperimentConfig& config);

/// Synthetic Cauchy data on the inversion mesh's Gamma from a mesh refined by
/// `config.data_refinement`. Refuses a refinement of 1 (same mesh for
/// synthesis and inversion).
CauchyData synthesize_data(const ExperimentConfig& config, const RobinProblem& truth,
                           const Mesh& inversion_mesh, const MetricTensor& metric);

}  // namespace robinlab
