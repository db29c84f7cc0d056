#pragma once

// Built-in acceptance suite on canonical configurations. Report files carry
// only deterministic quantities; wall-clock timings go to the console line.

#include "robinlab/report.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace robinlab {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;  // deterministic one-line summary
  std::string timing;  // console only
  std::vector<NamedValue> values;

  std::string console_line() const;
};

struct AcceptanceOptions {
  /// Perturbs the upper off-diagonal stiffness entries before the energy
  /// identity solve. The suite must notice.
  bool unsymmetrize_stiffness = false;
};

CriterionResult criterion_energy_identity(const AcceptanceOptions& options = {});
CriterionResult criterion_fem_spectral_agreement();
CriterionResult criterion_decay_law();
CriterionResult criterion_lipschitz_regime();
CriterionResult criterion_log_modulus();
CriterionResult criterion_maximum_principle();
CriterionResult criterion_corrosion_reconstruction();
CriterionResult criterion_finite_dimensional_A();
CriterionResult criterion_multiplication_bound();

/// Criteria 1 to 9; writes acceptance.csv and one criterion_<id>.csv per item.
std::vector<CriterionResult> run_acceptance_suite(const std::filesystem::path& out_dir,
                                                  const AcceptanceOptions& options = {});

/// Runs the suite twice (the second time into a scratch directory) and adds the
/// determinism criterion comparing the two sets of report files byte by byte.
std::vector<CriterionResult> run_validate(const std::filesystem::path& out_dir,
                                          const AcceptanceOptions& options = {});

}  // namespace robinlab
