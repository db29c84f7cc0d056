#include "robinlab/acceptance.hpp"

#include "robinlab/errors.hpp"
#include "robinlab/forward_fem.hpp"
#include "robinlab/inverse.hpp"
#include "robinlab/spectral.hpp"
#include "robinlab/stability.hpp"

#include <Eigen/SparseLU>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

namespace robinlab {

namespace fs = std::filesystem;

namespace {

std::string fmt(const char* spec, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

std::string g3(double x) { return fmt("%.3g", x); }

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }
  std::string label() const { return fmt("%.2f s", seconds()); }

 private:
  std::chrono::steady_clock::time_point start_;
};

const AnnularDomain& canonical_domain() {
  static const AnnularDomain d = AnnularDomain::circles(1.0, 2.0);
  return d;
}

// Circles 1 and 2, q = 1 on both, unit flux on Gamma and none on S.
RobinProblem radial_benchmark() {
  RobinProblem p;
  p.q_S = BoundaryFunction::constant(1.0);
  p.q_Gamma = BoundaryFunction::constant(1.0);
  p.flux_Gamma = BoundaryFunction::constant(1.0);
  p.kappa = 1.0;
  return p;
}

ModeSolution radial_oracle() {
  return spectral_solve(FourierSeries::constant(0.0), FourierSeries::constant(1.0), AnnulusParams{});
}

}  // namespace

std::string CriterionResult::console_line() const {
  std::string line = "[" + std::string(pass ? "PASS" : "FAIL") + "] " + std::to_string(id) + ". " +
                     name + ": " + detail;
  if (!timing.empty()) line += " (" + timing + ")";
  return line;
}

CriterionResult criterion_energy_identity(const AcceptanceOptions& options) {
  Stopwatch clock;
  CriterionResult r{1, "Galerkin energy identity", false, "", "", {}};
  const MetricTensor metric = MetricTensor::identity();
  const Mesh mesh = discretize(canonical_domain(), metric, 32, 320);
  const RobinProblem problem = radial_benchmark();

  Eigen::VectorXd u;
  if (options.unsymmetrize_stiffness) {
    LinearSystem sys = assemble(problem, mesh, metric);
    Eigen::SparseMatrix<double> a = sys.matrix;
    for (int k = 0; k < a.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(a, k); it; ++it) {
        if (it.row() < it.col()) it.valueRef() *= 1.05;
      }
    }
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(a);
    u = lu.solve(sys.rhs);
  } else {
    ForwardOptions opts;
    opts.tol = 1e-12;
    u = solve_forward(problem, mesh, metric, opts).nodal_values;
  }
  const double residual = energy_identity_residual(u, problem, mesh, metric);
  r.pass = residual <= 1e-10;
  r.detail = "relative residual " + g3(residual) + " (limit 1e-10)";
  r.values = {named("relative_residual", residual), named("limit", 1e-10),
              named("vertices", static_cast<double>(mesh.num_vertices())),
              named("unsymmetrized", options.unsymmetrize_stiffness ? "true" : "false")};
  r.timing = clock.label();
  return r;
}

CriterionResult criterion_fem_spectral_agreement() {
  Stopwatch clock;
  CriterionResult r{2, "FEM-spectral agreement", false, "", "", {}};
  const MetricTensor metric = MetricTensor::identity();
  const RobinProblem problem = radial_benchmark();
  const ModeSolution exact = radial_oracle();
  auto ex = [&](const Vec2& x) { return exact(x); };

  std::vector<double> h, err;
  for (int level = 0; level < 3; ++level) {
    const int nr = 20 << level;
    const Mesh mesh = discretize(canonical_domain(), metric, nr, 10 * nr);
    const ForwardSolution sol = solve_forward(problem, mesh, metric);
    h.push_back(mesh.h);
    err.push_back(l2_error(sol.nodal_values, ex, mesh) / l2_norm_exact(ex, mesh));
    r.values.push_back(named("h[" + std::to_string(level) + "]", mesh.h));
    r.values.push_back(named("l2_error[" + std::to_string(level) + "]", err.back()));
  }
  bool orders_ok = true;
  std::string orders;
  for (int level = 1; level < 3; ++level) {
    const double p = std::log(err[level - 1] / err[level]) / std::log(h[level - 1] / h[level]);
    r.values.push_back(named("order[" + std::to_string(level) + "]", p));
    orders_ok = orders_ok && std::abs(p - 2.0) <= 0.3;
    orders += (level > 1 ? ", " : "") + fmt("%.2f", p);
  }
  const bool accurate = err.back() <= 1e-3 && h.back() <= 0.0205;
  r.pass = accurate && orders_ok;
  r.detail = "L2 error " + g3(err.back()) + " at h = " + fmt("%.4f", h.back()) +
             " (limit 1e-3), orders " + orders + " (2 +- 0.3)";
  r.timing = clock.label();
  return r;
}

CriterionResult criterion_decay_law() {
  Stopwatch clock;
  CriterionResult r{3, "decay of sigma_min", false, "", "", {}};
  const double rate = std::log(2.0);
  std::vector<int> orders;
  for (int n = 0; n <= 12; ++n) orders.push_back(n);

  StabilityGeometry spectral(canonical_domain(), MetricTensor::identity(), 8, 256, 64);
  const double slope_spectral = fit_decay_rate(sigma_min_sweep(orders, spectral), NormConvention::L2);

  StabilityGeometry fem(canonical_domain(), MetricTensor::identity(), 80, 800, 64);
  fem.backend = ForwardBackend::Fem;
  const double slope_fem = fit_decay_rate(sigma_min_sweep(orders, fem), NormConvention::L2);

  const double dev_s = std::abs(slope_spectral - rate) / rate;
  const double dev_f = std::abs(slope_fem - rate) / rate;
  r.pass = dev_s <= 0.15 && dev_f <= 0.25 && fem.mesh.h <= 0.0205;
  r.detail = "slope " + fmt("%.4f", slope_spectral) + " spectral (" + fmt("%.1f", 100 * dev_s) +
             "% off ln 2, limit 15%), " + fmt("%.4f", slope_fem) + " FEM at h = " +
             fmt("%.4f", fem.mesh.h) + " (" + fmt("%.1f", 100 * dev_f) + "%, limit 25%)";
  r.values = {named("slope_spectral", slope_spectral), named("slope_fem", slope_fem),
              named("ln_ratio", rate), named("fem_h", fem.mesh.h)};
  r.timing = clock.label();
  return r;
}

CriterionResult criterion_lipschitz_regime() {
  Stopwatch clock;
  CriterionResult r{4, "Lipschitz regime on W_25", false, "", "", {}};
  StabilityGeometry geo(canonical_domain(), MetricTensor::identity(), 8, 256, 64);
  ForwardMapSetup setup = geo.setup(NormConvention::L2);
  const ForwardMapMatrix map = assemble_forward_map(25.0, geo.basis, setup);

  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(geo.basis.size()));
  for (std::size_t m = 0; m < map.dimension; ++m) coeffs[static_cast<Eigen::Index>(m)] = normal(rng);
  const BoundaryField truth = geo.basis.synthesize(coeffs);
  const CauchyData data = geo.data(truth);

  const double sigma = map.sigma_min(NormConvention::L2);
  const double cond = map.condition(NormConvention::L2);
  const InversionResult clean = invert_flux(data, map, 0.0);
  const double err_clean = (*clean.estimate - truth).l2_norm() / truth.l2_norm();
  const double eps = 1e-3;
  const InversionResult noisy = invert_flux(add_noise(data, eps, 5), map, 0.0);
  const double err_noisy = (*noisy.estimate - truth).l2_norm() / truth.l2_norm();
  const double bound = 10.0 * cond * eps;

  r.pass = sigma > 0.0 && err_clean <= 1e-6 && err_noisy <= bound;
  r.detail = "sigma_min " + g3(sigma) + ", noiseless error " + g3(err_clean) +
             " (limit 1e-6), noisy error " + g3(err_noisy) + " (limit 10 cond eps = " + g3(bound) +
             ")";
  r.values = {named("dimension", static_cast<double>(map.dimension)),
              named("sigma_min_l2", sigma),
              named("condition_l2", cond),
              named("error_noiseless", err_clean),
              named("error_noisy", err_noisy),
              named("noise_bound", bound)};
  r.timing = clock.label();
  return r;
}

CriterionResult criterion_log_modulus() {
  Stopwatch clock;
  CriterionResult r{5, "log-modulus fit", false, "", "", {}};
  StabilityGeometry geo(canonical_domain(), MetricTensor::identity(), 8, 256, 64);
  std::vector<BoundaryField> family;
  for (int n = 2; n <= 12; ++n) {
    family.push_back(BoundaryField::sample(geo.mesh.inner, [n](double t) { return std::cos(n * t); }));
  }
  const std::vector<ModulusSample> samples = modulus_samples(family, geo);
  const LogModulusFit fit = fit_log_modulus(samples, 0.125, 4);
  const InterpolationTable table =
      interpolation_check(samples, log_spaced(1.0, 1e3, 61), 0.125, fit.bold_c, fit.c);
  r.pass = fit.pass && table.all();
  r.detail = "c " + g3(fit.c) + " -> " + g3(fit.c_truncated) + " under truncation (20%), bold_c " +
             g3(fit.bold_c) + ", interpolation check " + (table.all() ? "holds" : "fails");
  r.values = {named("eta", fit.eta),         named("c", fit.c),
              named("bold_c", fit.bold_c),   named("c_truncated", fit.c_truncated),
              named("c_knee", fit.c_knee),   named("interpolation", table.all() ? "true" : "false")};
  r.timing = clock.label();
  return r;
}

CriterionResult criterion_maximum_principle() {
  Stopwatch clock;
  CriterionResult r{6, "maximum-principle lemma", false, "", "", {}};
  const MetricTensor metric = MetricTensor::identity();
  const Mesh mesh = discretize(canonical_domain(), metric, 32, 320);
  const double kappa = 1.0;
  const std::vector<BoundaryFunction> family = {
      BoundaryFunction::constant(0.0), BoundaryFunction::constant(0.2 * kappa),
      BoundaryFunction::constant(kappa),
      BoundaryFunction::angular([kappa](double t) { return kappa * (0.5 + 0.3 * std::cos(2.0 * t)); }),
      BoundaryFunction::angular([kappa](double t) { return kappa * 0.5 * (1.0 + std::sin(3.0 * t)); })};
  bool ok = true;
  double worst_gap = INFINITY, worst_v = INFINITY, min_kappa = 0.0;
  for (std::size_t k = 0; k < family.size(); ++k) {
    RobinProblem p = radial_benchmark();
    p.q_S = family[k];
    const MaxPrincipleAudit a = max_principle_audit(p, mesh, metric);
    ok = ok && a.min_u_q >= a.min_u_kappa - 1e-8 && a.min_u_kappa > 0.0 && a.min_v >= -1e-8;
    worst_gap = std::min(worst_gap, a.min_u_q - a.min_u_kappa);
    worst_v = std::min(worst_v, a.min_v);
    min_kappa = a.min_u_kappa;
    r.values.push_back(named("min_u_q[" + std::to_string(k) + "]", a.min_u_q));
    r.values.push_back(named("min_v[" + std::to_string(k) + "]", a.min_v));
  }
  r.values.push_back(named("min_u_kappa", min_kappa));
  r.pass = ok;
  r.detail = "min u_kappa " + g3(min_kappa) + ", smallest min u_q - min u_kappa " + g3(worst_gap) +
             ", smallest v " + g3(worst_v) + " over " + std::to_string(family.size()) + " members";
  r.timing = clock.label();
  return r;
}

CriterionResult criterion_corrosion_reconstruction() {
  Stopwatch clock;
  CriterionResult r{7, "corrosion reconstruction", false, "", "", {}};
  const MetricTensor metric = MetricTensor::identity();
  const Mesh mesh = discretize(canonical_domain(), metric, 16, 128);
  const Mesh fine = discretize(canonical_domain(), metric, 32, 256);
  auto q_true = [](double t) { return 0.5 + 0.3 * std::cos(2.0 * t); };

  RobinSetup setup;
  setup.mesh = &mesh;
  setup.metric = &metric;
  setup.flux_Gamma = BoundaryFunction::constant(1.0);
  setup.q_Gamma = BoundaryFunction::constant(1.0);
  setup.kappa = 1.0;
  setup.cutoff = 4.0;
  setup.max_iterations = 20;

  RobinProblem truth;
  truth.q_S = BoundaryFunction::angular(q_true);
  truth.q_Gamma = setup.q_Gamma;
  truth.flux_Gamma = setup.flux_Gamma;
  truth.kappa = 1.0;
  const CauchyData data = resample(extract_cauchy(solve_forward(truth, fine, metric), truth), mesh.outer);
  const BoundaryField q_ref = BoundaryField::sample(mesh.inner, q_true);

  const RobinResult clean = invert_robin(data, setup);
  const double err_clean = (*clean.estimate - q_ref).l2_norm() / q_ref.l2_norm();
  const RobinResult noisy = invert_robin(add_noise(data, 1e-2, 3), setup);
  const double err_noisy = (*noisy.estimate - q_ref).l2_norm() / q_ref.l2_norm();
  const double seconds = clock.seconds();

  r.pass = err_clean <= 0.05 && err_noisy <= 0.15 && clean.iterations <= 20 &&
           noisy.iterations <= 20 && seconds <= 300.0;
  r.detail = "error " + g3(err_clean) + " noiseless (limit 5%) in " +
             std::to_string(clean.iterations) + " iterations, " + g3(err_noisy) +
             " at eps 1e-2 (limit 15%) in " + std::to_string(noisy.iterations) + " iterations";
  r.values = {named("error_noiseless", err_clean),
              named("iterations_noiseless", static_cast<double>(clean.iterations)),
              named("stop_noiseless", clean.stop_reason),
              named("error_noisy", err_noisy),
              named("iterations_noisy", static_cast<double>(noisy.iterations)),
              named("stop_noisy", noisy.stop_reason)};
  r.timing = clock.label() + ", limit 300 s";
  return r;
}

CriterionResult criterion_finite_dimensional_A() {
  Stopwatch clock;
  CriterionResult r{8, "W_lambda inside A(sqrt(lambda))", false, "", "", {}};
  const Mesh mesh = discretize(canonical_domain(), MetricTensor::identity(), 2, 256);
  const EigenBasis basis = lb_eigenbasis(mesh.inner, 32);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal(0.0, 1.0);
  bool ok = true;
  for (double lambda : {4.0, 16.0, 25.0}) {
    const std::size_t dim = basis.count_up_to(lambda);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.size()));
      for (std::size_t m = 0; m < dim; ++m) c[static_cast<Eigen::Index>(m)] = normal(rng);
      worst = std::max(worst, in_A(basis.synthesize(c), std::sqrt(lambda)).ratio);
    }
    ok = ok && worst <= std::sqrt(lambda) + 1e-8;
    r.values.push_back(named("max_ratio[" + fmt("%g", lambda) + "]", worst));
    r.detail += (r.detail.empty() ? "" : ", ") + std::string("lambda ") + fmt("%g", lambda) +
                ": max ratio " + fmt("%.4f", worst) + " <= " + fmt("%g", std::sqrt(lambda));
  }
  r.pass = ok;
  r.timing = clock.label();
  return r;
}

CriterionResult criterion_multiplication_bound() {
  Stopwatch clock;
  CriterionResult r{9, "multiplication bound probe", false, "", "", {}};
  const Mesh mesh = discretize(canonical_domain(), MetricTensor::identity(), 2, 512);
  const EigenBasis basis = lb_eigenbasis(mesh.inner, 140);
  const BoundaryField q = BoundaryField::sample(mesh.inner, [](double t) { return std::cos(t); });
  const MultiplierProbe p32 = multiplication_bound_probe(q, 20, basis, 32);
  const MultiplierProbe p64 = multiplication_bound_probe(q, 20, basis, 64);
  const double change = std::abs(p64.operator_norm - p32.operator_norm) / p32.operator_norm;
  r.pass = change <= 0.1;
  r.detail = "ratio " + fmt("%.4f", p32.operator_norm) + " at band 32, " +
             fmt("%.4f", p64.operator_norm) + " at band 64, change " + fmt("%.2f", 100 * change) +
             "% (limit 10%)";
  r.values = {named("norm_band32", p32.operator_norm), named("norm_band64", p64.operator_norm),
              named("relative_change", change)};
  r.timing = clock.label();
  return r;
}

namespace {

template <class F>
CriterionResult guarded(int id, const std::string& name, F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return CriterionResult{id, name, false, std::string("error: ") + e.what(), "", {}};
  }
}

std::string criterion_file(int id) { return "criterion_" + std::to_string(id) + ".csv"; }

void write_reports(const fs::path& dir, const std::vector<CriterionResult>& results) {
  CsvWriter csv(dir / "acceptance.csv", {"id", "criterion", "pass", "detail"});
  for (const auto& r : results) {
    csv.row({std::to_string(r.id), r.name, r.pass ? "true" : "false", r.detail});
    if (!r.values.empty()) write_summary_csv(dir / criterion_file(r.id), r.values);
  }
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

std::vector<CriterionResult> run_acceptance_suite(const fs::path& out_dir,
                                                  const AcceptanceOptions& options) {
  ensure_output_dir(out_dir);
  std::vector<CriterionResult> results;
  results.push_back(guarded(1, "Galerkin energy identity",
                            [&] { return criterion_energy_identity(options); }));
  results.push_back(guarded(2, "FEM-spectral agreement", criterion_fem_spectral_agreement));
  results.push_back(guarded(3, "decay of sigma_min", criterion_decay_law));
  results.push_back(guarded(4, "Lipschitz regime on W_25", criterion_lipschitz_regime));
  results.push_back(guarded(5, "log-modulus fit", criterion_log_modulus));
  results.push_back(guarded(6, "maximum-principle lemma", criterion_maximum_principle));
  results.push_back(guarded(7, "corrosion reconstruction", criterion_corrosion_reconstruction));
  results.push_back(guarded(8, "W_lambda inside A(sqrt(lambda))", criterion_finite_dimensional_A));
  results.push_back(guarded(9, "multiplication bound probe", criterion_multiplication_bound));
  write_reports(out_dir, results);
  return results;
}

std::vector<CriterionResult> run_validate(const fs::path& out_dir, const AcceptanceOptions& options) {
  Stopwatch clock;
  std::vector<CriterionResult> results = run_acceptance_suite(out_dir, options);
  const fs::path rerun = out_dir / "rerun";
  run_acceptance_suite(rerun, options);

  CriterionResult det{10, "determinism", true, "", "", {}};
  std::vector<std::string> names = {"acceptance.csv"};
  for (const auto& r : results) {
    if (!r.values.empty()) names.push_back(criterion_file(r.id));
  }
  std::vector<std::string> differing;
  for (const auto& n : names) {
    if (!fs::exists(rerun / n) || slurp(out_dir / n) != slurp(rerun / n)) differing.push_back(n);
  }
  det.pass = differing.empty();
  det.detail = std::to_string(names.size()) + " report files compared, " +
               std::to_string(differing.size()) + " differ";
  for (const auto& n : differing) det.detail += " " + n;
  det.values = {named("files", static_cast<double>(names.size())),
                named("differing", static_cast<double>(differing.size()))};
  det.timing = clock.label() + " for both runs";
  fs::remove_all(rerun);
  results.push_back(det);

  // Rewrite so the summary also records the determinism verdict.
  write_reports(out_dir, results);
  return results;
}

}  // namespace robinlab
