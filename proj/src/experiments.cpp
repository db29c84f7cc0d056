#include "robinlab/experiments.hpp"

#include "robinlab/errors.hpp"
#include "robinlab/spectral.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace robinlab {

namespace fs = std::filesystem;

std::string RunSummary::value(const std::string& name) const {
  for (const auto& v : values) {
    if (v.name == name) return v.value;
  }
  throw DomainError("summary has no entry '" + name + "'");
}

bool spectral_oracle_applies(const ExperimentConfig& c) {
  return c.inner.cos.empty() && c.inner.sin.empty() && c.outer.cos.empty() && c.outer.sin.empty() &&
         c.metric.kind == "identity" && c.q_S.is_constant() && c.q_Gamma.is_constant() &&
         c.source.is_zero() && c.absorption == 0.0;
}

namespace {

AnnulusParams annulus_params(const ExperimentConfig& c) {
  AnnulusParams p;
  p.inner_radius = c.inner.radius;
  p.outer_radius = c.outer.radius;
  p.q_S = c.q_S.a0;
  p.q_Gamma = c.q_Gamma.a0;
  return p;
}

Mesh make_mesh(const ExperimentConfig& c, const AnnularDomain& domain, const MetricTensor& metric,
               int factor) {
  return discretize(domain, metric, c.n_radial * factor, c.n_angular * factor);
}

double relative(double err, double ref) { return ref > 0.0 ? err / ref : err; }

void require_backend_fits(const ExperimentConfig& c, const std::string& backend,
                          const std::string& field) {
  if (backend != "spectral") return;
  const bool circles = c.inner.cos.empty() && c.inner.sin.empty() && c.outer.cos.empty() &&
                       c.outer.sin.empty();
  if (!circles || c.metric.kind != "identity" || !c.q_S.is_constant() || !c.q_Gamma.is_constant()) {
    throw ConfigError(field +
                      ": the spectral backend needs concentric circles, the identity metric and "
                      "constant Robin coefficients");
  }
}

ForwardBackend backend_of(const std::string& name) {
  return name == "spectral" ? ForwardBackend::Spectral : ForwardBackend::Fem;
}

}  // namespace

CauchyData synthesize_data(const ExperimentConfig& c, const RobinProblem& truth,
                           const Mesh& inversion_mesh, const MetricTensor& metric) {
  if (c.data_refinement < 2) {
    throw ConfigError(
        "inversion.data_refinement: synthetic data must come from a finer mesh than the inversion "
        "mesh (got 1); solving both on the same mesh hides the discretization error");
  }
  const AnnularDomain domain = build_domain(c);
  const Mesh fine = make_mesh(c, domain, metric, c.data_refinement);
  const ForwardSolution sol = solve_forward(truth, fine, metric);
  return resample(extract_cauchy(sol, truth), inversion_mesh.outer);
}

// ---------------------------------------------------------------------------
// forward

RunSummary run_forward(const ExperimentConfig& c) {
  validate_config(c);
  const fs::path out = c.output;
  ensure_output_dir(out);
  const AnnularDomain domain = build_domain(c);
  const MetricTensor metric = build_metric(c);
  const RobinProblem problem = build_problem(c);
  const bool oracle = spectral_oracle_applies(c);
  std::optional<ModeSolution> exact;
  if (oracle) exact = spectral_solve(c.flux_S.series(), c.flux_Gamma.series(), annulus_params(c));

  std::vector<Mesh> meshes;
  std::vector<ForwardSolution> sols;
  for (int level = 0; level < c.refinements; ++level) {
    meshes.push_back(make_mesh(c, domain, metric, 1 << level));
    sols.push_back(solve_forward(problem, meshes.back(), metric));
  }
  const Mesh& mesh = meshes.back();
  const ForwardSolution& sol = sols.back();
  const CauchyData cauchy = extract_cauchy(sol, problem);

  RunSummary summary;
  summary.files.push_back(out / "solution.csv");
  write_solution_csv(summary.files.back(), mesh, sol.nodal_values);
  summary.files.push_back(out / "cauchy.csv");
  write_cauchy_csv(summary.files.back(), cauchy);

  auto& v = summary.values;
  v.push_back(named("vertices", static_cast<double>(mesh.num_vertices())));
  v.push_back(named("h", mesh.h));
  v.push_back(named("energy", sol.energy));
  v.push_back(named("energy_identity_residual",
                    energy_identity_residual(sol.nodal_values, problem, mesh, metric)));
  v.push_back(named("min_u", sol.nodal_values.size() ? sol.nodal_values.minCoeff() : 0.0));
  v.push_back(named("max_u", sol.nodal_values.size() ? sol.nodal_values.maxCoeff() : 0.0));
  v.push_back(named("cauchy_C", cauchy_C(cauchy)));

  if (oracle) {
    auto ex = [&](const Vec2& x) { return (*exact)(x); };
    const double ref = l2_norm_exact(ex, mesh);
    v.push_back(named("l2_error_vs_oracle", relative(l2_error(sol.nodal_values, ex, mesh), ref),
                      "relative, separated-variables oracle"));
    const SpectralCauchy sc =
        spectral_forward(c.flux_S.series(), c.flux_Gamma.series(), annulus_params(c));
    summary.files.push_back(out / "fourier_flux_S.csv");
    write_fourier_csv(summary.files.back(), c.flux_S.series());
    summary.files.push_back(out / "fourier_flux_Gamma.csv");
    write_fourier_csv(summary.files.back(), c.flux_Gamma.series());
    summary.files.push_back(out / "fourier_trace.csv");
    write_fourier_csv(summary.files.back(), sc.trace);
    summary.files.push_back(out / "fourier_conormal.csv");
    write_fourier_csv(summary.files.back(), sc.conormal);
  }

  if (c.refinements > 1) {
    summary.files.push_back(out / "convergence.csv");
    CsvWriter csv(summary.files.back(),
                  {"level", "n_radial", "n_angular", "h", "error", "order", "reference"});
    std::vector<double> errors;
    for (int level = 0; level < c.refinements; ++level) {
      double e = 0.0;
      std::string reference;
      if (oracle) {
        auto ex = [&](const Vec2& x) { return (*exact)(x); };
        e = relative(l2_error(sols[level].nodal_values, ex, meshes[level]),
                     l2_norm_exact(ex, meshes[level]));
        reference = "spectral";
      } else if (level + 1 < c.refinements) {
        const BoundaryField finest = sol.trace_Gamma.resample(meshes[level].outer);
        e = relative((sols[level].trace_Gamma - finest).l2_norm(), finest.l2_norm());
        reference = "finest_trace";
      } else {
        break;
      }
      errors.push_back(e);
      std::string order = "";
      if (level > 0 && errors[level] > 0.0 && errors[level - 1] > 0.0) {
        order = format_number(std::log(errors[level - 1] / errors[level]) /
                              std::log(meshes[level - 1].h / meshes[level].h));
      }
      csv.row({std::to_string(level), std::to_string(c.n_radial << level),
               std::to_string(c.n_angular << level), format_number(meshes[level].h),
               format_number(e), order, reference});
    }
  }

  summary.files.push_back(out / "summary.csv");
  write_summary_csv(summary.files.back(), v);
  return summary;
}

// ---------------------------------------------------------------------------
// invert-flux

RunSummary run_invert_flux(const ExperimentConfig& c) {
  validate_config(c);
  require_backend_fits(c, c.inversion_backend, "inversion.backend");
  if (c.data_file.empty() && !c.truth_flux_S) {
    throw ConfigError("inversion: provide data_file or truth.flux_S");
  }
  const fs::path out = c.output;
  ensure_output_dir(out);
  const AnnularDomain domain = build_domain(c);
  const MetricTensor metric = build_metric(c);
  const Mesh mesh = make_mesh(c, domain, metric, 1);

  CauchyData data = [&] {
    if (!c.data_file.empty()) return cauchy_from_table(read_cauchy_csv(c.data_file), mesh.outer);
    RobinProblem truth;
    truth.q_S = c.q_S.boundary();
    truth.q_Gamma = c.q_Gamma.boundary();
    truth.flux_S = c.truth_flux_S->boundary();
    truth.kappa = c.kappa;
    return synthesize_data(c, truth, mesh, metric);
  }();
  if (c.noise > 0.0) data = add_noise(data, c.noise, c.seed);

  const EigenBasis basis = lb_eigenbasis(mesh.inner, mesh.inner->size() / 2);
  ForwardMapSetup setup;
  setup.mesh = &mesh;
  setup.metric = &metric;
  setup.domain = &domain;
  setup.q_S = c.q_S.boundary();
  setup.q_Gamma = c.q_Gamma.boundary();
  setup.backend = backend_of(c.inversion_backend);
  setup.norm_convention = NormConvention::L2;
  const ForwardMapMatrix map = assemble_forward_map(c.cutoff, basis, setup);
  const InversionResult res = invert_flux(data, map, c.alpha);

  RobinProblem check;
  check.q_S = setup.q_S;
  check.q_Gamma = setup.q_Gamma;
  check.flux_S = BoundaryFunction::nodal(*res.estimate);
  const ForwardSolution u = solve_forward(check, mesh, metric);

  RunSummary summary;
  summary.files.push_back(out / "estimate.csv");
  write_field_csv(summary.files.back(), *res.estimate);
  summary.files.push_back(out / "iterations.csv");
  write_iterations_csv(summary.files.back(),
                       {RobinIterate{1, res.relative_residual, res.estimate->l2_norm(),
                                     u.trace_S.min(), 1.0}});
  summary.files.push_back(out / "eigenvalues.csv");
  write_eigenvalues_csv(summary.files.back(), map.basis);

  auto& v = summary.values;
  v.push_back(named("backend", c.inversion_backend));
  v.push_back(named("cutoff", c.cutoff));
  v.push_back(named("dimension", static_cast<double>(map.dimension)));
  v.push_back(named("alpha", c.alpha));
  v.push_back(named("noise", c.noise));
  v.push_back(named("seed", std::to_string(c.seed)));
  v.push_back(named("sigma_min_l2", map.sigma_min(NormConvention::L2)));
  v.push_back(named("sigma_min_h1", map.sigma_min(NormConvention::H1)));
  v.push_back(named("condition_l2", map.condition(NormConvention::L2)));
  v.push_back(named("relative_residual", res.relative_residual));
  if (c.truth_flux_S && c.data_file.empty()) {
    const BoundaryField truth = BoundaryField::sample(mesh.inner, *c.truth_flux_S);
    const BoundaryField projected = project_W(truth, c.cutoff, basis);
    v.push_back(named("relative_error", relative((*res.estimate - truth).l2_norm(), truth.l2_norm()),
                      "against the truth sampled on S"));
    v.push_back(named("relative_error_projection",
                      relative((*res.estimate - projected).l2_norm(), projected.l2_norm()),
                      "against the truth projected onto W_lambda"));
  }
  summary.files.push_back(out / "summary.csv");
  write_summary_csv(summary.files.back(), v);
  return summary;
}

// ---------------------------------------------------------------------------
// invert-robin

RunSummary run_invert_robin(const ExperimentConfig& c) {
  validate_config(c);
  if (c.data_file.empty() && !c.truth_q_S) {
    throw ConfigError("inversion: provide data_file or truth.q_S");
  }
  const fs::path out = c.output;
  ensure_output_dir(out);
  const AnnularDomain domain = build_domain(c);
  const MetricTensor metric = build_metric(c);
  const Mesh mesh = make_mesh(c, domain, metric, 1);
  const RobinProblem base = build_problem(c);

  CauchyData data = [&] {
    if (!c.data_file.empty()) return cauchy_from_table(read_cauchy_csv(c.data_file), mesh.outer);
    RobinProblem truth = base;
    truth.q_S = c.truth_q_S->boundary();
    return synthesize_data(c, truth, mesh, metric);
  }();
  if (c.noise > 0.0) data = add_noise(data, c.noise, c.seed);

  RobinSetup setup;
  setup.mesh = &mesh;
  setup.metric = &metric;
  setup.source = base.source;
  setup.flux_S = base.flux_S;
  setup.flux_Gamma = base.flux_Gamma;
  setup.q_Gamma = base.q_Gamma;
  setup.kappa = c.kappa;
  setup.cutoff = c.cutoff;
  setup.max_iterations = c.max_iterations;
  setup.tolerance = c.tolerance;
  setup.alpha = c.alpha;
  const RobinResult res = invert_robin(data, setup);

  RunSummary summary;
  summary.files.push_back(out / "estimate.csv");
  write_field_csv(summary.files.back(), *res.estimate);
  summary.files.push_back(out / "iterations.csv");
  write_iterations_csv(summary.files.back(), res.history);

  auto& v = summary.values;
  v.push_back(named("cutoff", c.cutoff));
  v.push_back(named("noise", c.noise));
  v.push_back(named("seed", std::to_string(c.seed)));
  v.push_back(named("iterations", static_cast<double>(res.iterations)));
  v.push_back(named("converged", res.converged ? "true" : "false", res.stop_reason));
  v.push_back(named("mismatch", res.mismatch, "relative Cauchy-data mismatch"));
  v.push_back(named("clamp_contacts", static_cast<double>(res.clamp_contacts)));
  if (c.truth_q_S && c.data_file.empty()) {
    const BoundaryField truth = BoundaryField::sample(mesh.inner, *c.truth_q_S);
    v.push_back(named("relative_error", relative((*res.estimate - truth).l2_norm(), truth.l2_norm()),
                      "against the truth sampled on S"));
  }
  summary.files.push_back(out / "summary.csv");
  write_summary_csv(summary.files.back(), v);
  return summary;
}

// ---------------------------------------------------------------------------
// stability

namespace {

std::vector<BoundaryFunction> q_family(double kappa) {
  return {BoundaryFunction::constant(0.2 * kappa), BoundaryFunction::constant(kappa),
          BoundaryFunction::angular(
              [kappa](double t) { return kappa * (0.5 + 0.3 * std::cos(2.0 * t)); })};
}

std::vector<RobinProblem> random_flux_batch(const ExperimentConfig& c, int members, int band,
                                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<RobinProblem> batch;
  for (int k = 0; k < members; ++k) {
    FourierSpec f;
    f.a0 = normal(rng);
    for (int n = 1; n <= band; ++n) {
      f.cos.push_back(normal(rng));
      f.sin.push_back(normal(rng));
    }
    RobinProblem p;
    p.q_S = c.q_S.boundary();
    p.q_Gamma = c.q_Gamma.boundary();
    p.flux_S = f.boundary();
    p.kappa = c.kappa;
    batch.push_back(p);
  }
  return batch;
}

}  // namespace

StabilityReport run_stability(const ExperimentConfig& c) {
  validate_config(c);
  require_backend_fits(c, c.stability_backend, "stability.backend");
  const fs::path out = c.output;
  ensure_output_dir(out);

  StabilityGeometry geo(build_domain(c), build_metric(c), c.n_radial, c.n_angular,
                        static_cast<std::size_t>(c.n_angular / 2));
  geo.q_S = c.q_S.boundary();
  geo.q_Gamma = c.q_Gamma.boundary();
  geo.backend = backend_of(c.stability_backend);
  const std::size_t needed = static_cast<std::size_t>(2 * c.orders.back() + 1);
  if (needed + 1 > geo.basis.size()) {
    throw ConfigError("stability.orders: mode order " + std::to_string(c.orders.back()) +
                      " is not resolved by n_angular = " + std::to_string(c.n_angular));
  }

  StabilityReport report;
  report.sigma_table = sigma_min_sweep(c.orders, geo);

  std::vector<NamedValue> fit_rows;
  const bool circles = c.inner.cos.empty() && c.inner.sin.empty() && c.outer.cos.empty() &&
                       c.outer.sin.empty();
  if (report.sigma_table.size() >= 4) {
    report.decay_slope_l2 = fit_decay_rate(report.sigma_table, NormConvention::L2);
    report.decay_slope_h1 = fit_decay_rate(report.sigma_table, NormConvention::H1);
    fit_rows.push_back(named("decay_slope_l2", *report.decay_slope_l2, "upper half of the grid"));
    fit_rows.push_back(named("decay_slope_h1", *report.decay_slope_h1,
                             "upper half of the grid; the H1 weight adds to the slope"));
    if (circles) {
      const double rate = std::log(c.outer.radius / c.inner.radius);
      fit_rows.push_back(named("log_radius_ratio", rate));
      const bool ok = std::abs(*report.decay_slope_l2 - rate) <= 0.15 * rate;
      report.verdicts.push_back({"decay_slope", ok, "L2 slope within 15% of ln(R1/R0)"});
    }
  } else {
    fit_rows.push_back(named("decay_slope_l2", "skipped", "fewer than 4 sweep points"));
    fit_rows.push_back(named("decay_slope_h1", "skipped", "fewer than 4 sweep points"));
  }

  std::vector<BoundaryField> family;
  for (int n : c.family) {
    family.push_back(BoundaryField::sample(geo.mesh.inner, [n](double t) { return std::cos(n * t); }));
  }
  report.samples = modulus_samples(family, geo);
  report.fit = fit_log_modulus(report.samples, c.eta);
  const LogModulusFit& fit = *report.fit;
  const std::string range_note = fit.eta_in_range ? "" : "eta outside (0, 1/4): diagnostic only";
  fit_rows.push_back(named("eta", fit.eta, range_note));
  fit_rows.push_back(named("c", fit.c, "smallest grid c with a positive bold_c"));
  fit_rows.push_back(named("bold_c", fit.bold_c));
  fit_rows.push_back(named("c_truncated", fit.c_truncated,
                           std::to_string(fit.truncated_members) + " members"));
  fit_rows.push_back(named("bold_c_truncated", fit.bold_c_truncated));
  fit_rows.push_back(named("c_knee", fit.c_knee, "largest c keeping half of bold_c"));
  fit_rows.push_back(named("log_modulus_verdict", fit.pass ? "pass" : "fail", range_note));
  const InterpolationTable table =
      interpolation_check(report.samples, log_spaced(1.0, 1e3, 61), c.eta, fit.bold_c, fit.c);
  fit_rows.push_back(named("interpolation_check", table.all() ? "pass" : "fail", "s in [1, 1e3]"));
  report.verdicts.push_back({"log_modulus", fit.pass, "c stable within 20% under truncation"});
  report.verdicts.push_back({"interpolation_check", table.all(), "fitted constants, s in [1, 1e3]"});

  if (c.audits) {
    const LipschitzCheck lip =
        lipschitz_check(c.lipschitz_cutoff, c.lipschitz_bound, c.lipschitz_samples, geo);
    report.audits.push_back({"lipschitz_c_emp", lip.c_emp, lip.sigma_min, lip.pass});
    const bool hilbert_match = std::abs(lip.c_emp_hilbert - lip.sigma_min) <= 0.01 * lip.sigma_min;
    report.audits.push_back({"lipschitz_c_emp_hilbert", lip.c_emp_hilbert, lip.sigma_min, hilbert_match});
    report.verdicts.push_back({"lipschitz", lip.pass, "c_emp >= 0.99 sigma_min"});

    const RobinProblem base = build_problem(c);
    bool data_ok = true;
    std::string why;
    try {
      require_nonnegative_data(base, geo.mesh);
    } catch (const DomainError& e) {
      data_ok = false;
      why = e.what();
    }
    if (data_ok) {
      bool mp_ok = true;
      const auto qs = q_family(c.kappa);
      for (std::size_t k = 0; k < qs.size(); ++k) {
        RobinProblem p = base;
        p.q_S = qs[k];
        const MaxPrincipleAudit mp = max_principle_audit(p, geo.mesh, geo.metric);
        const std::string tag = "[" + std::to_string(k) + "]";
        report.audits.push_back({"max_principle_min_u_q" + tag, mp.min_u_q, mp.min_u_kappa, mp.pass});
        report.audits.push_back({"max_principle_min_v" + tag, mp.min_v, -1e-8, mp.min_v >= -1e-8});
        mp_ok = mp_ok && mp.pass && mp.min_v >= -1e-8;
      }
      report.verdicts.push_back({"max_principle", mp_ok, "min u_q >= min u_kappa, v >= -1e-8"});

      const SupBoundAudit sup = sup_bound_audit(qs, base, geo.mesh, geo.metric);
      for (std::size_t k = 0; k < sup.sup_u.size(); ++k) {
        report.audits.push_back({"sup_u[" + std::to_string(k) + "]", sup.sup_u[k], sup.mean,
                                 std::abs(sup.sup_u[k] - sup.mean) <= 0.1 * sup.mean});
      }
      report.verdicts.push_back({"sup_bound", sup.pass, "sup |u_q| within 10% of the family mean"});

      std::vector<std::pair<BoundaryField, BoundaryField>> pairs;
      const BoundaryField q0 = BoundaryField::constant(geo.mesh.inner, 0.5 * c.kappa);
      for (int k = 0; k <= 5; ++k) {
        const double amp = 0.2 * c.kappa;
        pairs.emplace_back(q0, q0 + BoundaryField::sample(geo.mesh.inner, [k, amp](double t) {
                                 return amp * std::cos(k * t);
                               }));
      }
      const LogModulusFit echo = fit_log_modulus(
          corrosion_samples(pairs, base, geo.mesh, geo.metric), c.eta, 2);
      fit_rows.push_back(named("corrosion_c", echo.c));
      fit_rows.push_back(named("corrosion_bold_c", echo.bold_c));
      fit_rows.push_back(named("corrosion_verdict", echo.pass ? "pass" : "fail"));
      report.verdicts.push_back({"corrosion_echo", echo.pass, "finite stable constants"});
    } else {
      report.verdicts.push_back({"max_principle", false, "skipped: " + why});
    }

    const MetricTensor& metric = geo.metric;
    const Mesh fine = discretize(geo.domain, metric, 2 * c.n_radial, 2 * c.n_angular);
    const EnergyAudit energy =
        energy_estimate_audit(random_flux_batch(c, 20, 5, c.seed), geo.mesh, fine, metric);
    report.audits.push_back({"energy_ratio_coarse", energy.ratio_coarse, energy.ratio_coarse, true});
    report.audits.push_back({"energy_ratio_fine", energy.ratio_fine, energy.ratio_coarse, energy.pass});
    report.verdicts.push_back({"energy_estimate", energy.pass, "worst ratio stable within 10%"});

    const Mesh probe_mesh = discretize(geo.domain, metric, 2, 512);
    const EigenBasis probe_basis = lb_eigenbasis(probe_mesh.inner, 140);
    const BoundaryField qcos =
        BoundaryField::sample(probe_mesh.inner, [](double t) { return std::cos(t); });
    const MultiplierProbe p32 = multiplication_bound_probe(qcos, 20, probe_basis, 32, c.seed);
    const MultiplierProbe p64 = multiplication_bound_probe(qcos, 20, probe_basis, 64, c.seed);
    const bool mult_ok = std::abs(p64.operator_norm - p32.operator_norm) <= 0.1 * p32.operator_norm;
    report.audits.push_back({"multiplier_norm_band32", p32.operator_norm, p32.operator_norm, true});
    report.audits.push_back({"multiplier_norm_band64", p64.operator_norm, p32.operator_norm, mult_ok});
    report.verdicts.push_back({"multiplier_probe", mult_ok, "band 32 -> 64 change within 10%"});
  }

  report.files.push_back(out / "sweep.csv");
  write_sweep_csv(report.files.back(), report.sigma_table);
  report.files.push_back(out / "fit.csv");
  write_summary_csv(report.files.back(), fit_rows);
  report.files.push_back(out / "audits.csv");
  write_audits_csv(report.files.back(), report.audits);
  report.files.push_back(out / "sweep.svg");
  write_sweep_svg(report.files.back(), report.sigma_table, &fit, report.samples);
  return report;
}

}  // namespace robinlab
