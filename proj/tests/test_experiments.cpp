#include "robinlab/acceptance.hpp"
#include "robinlab/errors.hpp"
#include "robinlab/experiments.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

using namespace robinlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("robinlab_exp_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Column `col` of a CSV file, header skipped.
std::vector<std::string> column(const fs::path& p, std::size_t col) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> out;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    for (std::size_t k = 0; k <= col; ++k) std::getline(ss, cell, ',');
    out.push_back(cell);
  }
  return out;
}

ExperimentConfig corrosion_config(const fs::path& out) {
  ExperimentConfig c = default_config();
  c.n_radial = 16;
  c.n_angular = 128;
  c.cutoff = 4.0;
  c.truth_q_S = FourierSpec{0.5, {0.0, 0.3}, {}};
  c.output = out.string();
  return c;
}

}  // namespace

TEST_CASE("forward run on the radial benchmark") {
  ExperimentConfig c = default_config();
  c.refinements = 2;
  c.output = scratch("radial").string();
  const RunSummary s = run_forward(c);
  const auto trace = column(fs::path(c.output) / "cauchy.csv", 1);
  double lo = 1e9, hi = -1e9;
  for (const auto& t : trace) {
    lo = std::min(lo, std::stod(t));
    hi = std::max(hi, std::stod(t));
  }
  CHECK(hi - lo < 1e-3);
  CHECK(std::stod(s.value("l2_error_vs_oracle")) < 1e-3);
  CHECK(fs::exists(fs::path(c.output) / "convergence.csv"));
  CHECK(fs::exists(fs::path(c.output) / "fourier_trace.csv"));
}

TEST_CASE("forward run with zero data writes zeros") {
  ExperimentConfig c = default_config();
  c.flux_Gamma = FourierSpec{};
  c.n_radial = 4;
  c.n_angular = 32;
  c.output = scratch("zero").string();
  run_forward(c);
  for (const auto& u : column(fs::path(c.output) / "solution.csv", 3)) CHECK(std::stod(u) == 0.0);
  for (const auto& t : column(fs::path(c.output) / "cauchy.csv", 1)) CHECK(std::stod(t) == 0.0);
}

TEST_CASE("forward run output is deterministic") {
  ExperimentConfig c = default_config();
  c.flux_S = FourierSpec{0.2, {0.0, 0.5}, {0.1}};
  c.metric.kind = "conformal_sine";
  c.metric.amplitude = 0.1;
  c.refinements = 2;
  const fs::path a = scratch("det_a");
  const fs::path b = scratch("det_b");
  c.output = a.string();
  run_forward(c);
  c.output = b.string();
  run_forward(c);
  for (const char* f : {"solution.csv", "cauchy.csv", "summary.csv", "convergence.csv"}) {
    CHECK(slurp(a / f) == slurp(b / f));
  }
}

TEST_CASE("flux inversion run") {
  ExperimentConfig c = default_config();
  c.flux_Gamma = FourierSpec{};
  c.n_angular = 128;
  c.truth_flux_S = FourierSpec{0.2, {0.0, 1.0}, {-0.5}};
  c.output = scratch("flux").string();
  const RunSummary s = run_invert_flux(c);
  CHECK(std::stod(s.value("relative_error")) < 1e-2);
  CHECK(fs::exists(fs::path(c.output) / "eigenvalues.csv"));
}

TEST_CASE("corrosion run, noiseless and noisy") {
  const RunSummary clean = run_invert_robin(corrosion_config(scratch("corr")));
  CHECK(std::stod(clean.value("relative_error")) <= 0.05);

  const fs::path first = scratch("corr_noisy_a");
  ExperimentConfig c = corrosion_config(first);
  c.noise = 0.01;
  c.seed = 3;
  const RunSummary a = run_invert_robin(c);
  CHECK(std::stod(a.value("relative_error")) <= 0.15);
  c.output = scratch("corr_noisy_b").string();
  run_invert_robin(c);
  CHECK(slurp(first / "estimate.csv") == slurp(fs::path(c.output) / "estimate.csv"));
  CHECK(slurp(first / "summary.csv") == slurp(fs::path(c.output) / "summary.csv"));
}

TEST_CASE("inversion input guards") {
  ExperimentConfig c = corrosion_config(scratch("guard"));
  c.data_refinement = 1;
  CHECK_THROWS_AS(run_invert_robin(c), ConfigError);

  c = corrosion_config(scratch("guard2"));
  c.data_file = "/nonexistent/cauchy.csv";
  CHECK_THROWS_AS(run_invert_robin(c), IoError);

  c = corrosion_config(scratch("guard3"));
  c.truth_q_S.reset();
  CHECK_THROWS_AS(run_invert_robin(c), ConfigError);
}

TEST_CASE("inversion from a data file") {
  ExperimentConfig fwd = default_config();
  fwd.n_radial = 32;
  fwd.n_angular = 256;
  fwd.q_S = FourierSpec{0.5, {0.0, 0.3}, {}};
  fwd.output = scratch("datafile_fwd").string();
  run_forward(fwd);

  ExperimentConfig c = corrosion_config(scratch("datafile"));
  c.truth_q_S.reset();
  c.data_file = (fs::path(fwd.output) / "cauchy.csv").string();
  const RunSummary s = run_invert_robin(c);
  const auto q = column(fs::path(c.output) / "estimate.csv", 1);
  const auto theta = column(fs::path(c.output) / "estimate.csv", 0);
  double worst = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    worst = std::max(worst, std::abs(std::stod(q[k]) - 0.5 - 0.3 * std::cos(2 * std::stod(theta[k]))));
  }
  CHECK(worst < 0.05);
  CHECK(s.value("converged") == "true");
}

TEST_CASE("stability run") {
  ExperimentConfig c = default_config();
  c.n_radial = 4;
  c.n_angular = 256;
  c.output = scratch("stab").string();
  const StabilityReport r = run_stability(c);
  REQUIRE(r.decay_slope_l2);
  CHECK(*r.decay_slope_l2 == doctest::Approx(std::log(2.0)).epsilon(0.15));
  REQUIRE(r.decay_slope_h1);
  CHECK(*r.decay_slope_h1 > *r.decay_slope_l2);
  for (const auto& v : r.verdicts) {
    INFO(v.name);
    CHECK(v.pass);
  }
  for (const char* f : {"sweep.csv", "fit.csv", "audits.csv", "sweep.svg"}) {
    CHECK(fs::exists(fs::path(c.output) / f));
  }
  CHECK(slurp(fs::path(c.output) / "sweep.svg").find("<svg") != std::string::npos);
}

TEST_CASE("single-point sweep skips the fit with a notice") {
  ExperimentConfig c = default_config();
  c.n_radial = 4;
  c.n_angular = 64;
  c.orders = {3};
  c.audits = false;
  c.output = scratch("single").string();
  const StabilityReport r = run_stability(c);
  CHECK_FALSE(r.decay_slope_l2);
  CHECK(slurp(fs::path(c.output) / "fit.csv").find("decay_slope_l2,skipped") != std::string::npos);
}

TEST_CASE("unwritable output is reported before solving") {
  const fs::path dir = scratch("blocked");
  fs::create_directories(dir);
  std::ofstream(dir / "file") << "x";
  ExperimentConfig c = default_config();
  c.output = (dir / "file" / "out").string();
  CHECK_THROWS_AS(run_forward(c), IoError);
  CHECK_THROWS_AS(run_validate(dir / "file" / "v"), IoError);
}

TEST_CASE("the energy identity criterion notices an unsymmetrized stiffness") {
  CHECK(criterion_energy_identity().pass);
  AcceptanceOptions mutate;
  mutate.unsymmetrize_stiffness = true;
  CHECK_FALSE(criterion_energy_identity(mutate).pass);
}
