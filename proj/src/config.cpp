#include "robinlab/config.hpp"

#include "robinlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace robinlab {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// FourierSpec

bool FourierSpec::is_constant() const {
  auto zero = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
  };
  return zero(cos) && zero(sin);
}

bool FourierSpec::is_zero() const { return a0 == 0.0 && is_constant(); }

double FourierSpec::operator()(double theta) const {
  double v = a0;
  for (std::size_t n = 0; n < cos.size(); ++n) v += cos[n] * std::cos((n + 1.0) * theta);
  for (std::size_t n = 0; n < sin.size(); ++n) v += sin[n] * std::sin((n + 1.0) * theta);
  return v;
}

FourierSeries FourierSpec::series() const {
  FourierSeries s;
  s.a0 = a0;
  const std::size_t order = std::max(cos.size(), sin.size());
  s.cos.assign(order, 0.0);
  s.sin.assign(order, 0.0);
  std::copy(cos.begin(), cos.end(), s.cos.begin());
  std::copy(sin.begin(), sin.end(), s.sin.begin());
  return s;
}

BoundaryFunction FourierSpec::boundary() const {
  if (is_constant()) return BoundaryFunction::constant(a0);
  const FourierSpec copy = *this;
  return BoundaryFunction::angular([copy](double theta) { return copy(theta); });
}

double FourierSpec::sampled_min() const {
  double m = a0;
  constexpr int kSamples = 4096;
  for (int k = 0; k < kSamples; ++k) m = std::min(m, (*this)(2.0 * std::numbers::pi * k / kSamples));
  return m;
}

double FourierSpec::sampled_max() const {
  double m = a0;
  constexpr int kSamples = 4096;
  for (int k = 0; k < kSamples; ++k) m = std::max(m, (*this)(2.0 * std::numbers::pi * k / kSamples));
  return m;
}

ExperimentConfig default_config() { return ExperimentConfig{}; }

// ---------------------------------------------------------------------------
// JSON

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& message) {
  throw ConfigError(field + ": " + message);
}

void require_object(const json& j, const std::string& field) {
  if (!j.is_object()) fail(field, "expected an object");
}

void check_keys(const json& j, const std::string& field, const std::set<std::string>& allowed) {
  require_object(j, field);
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key)) fail(field.empty() ? key : field + "." + key, "unknown key");
  }
}

std::string join(const std::string& a, const std::string& b) { return a.empty() ? b : a + "." + b; }

double number(const json& j, const std::string& key, const std::string& field, double fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) fail(join(field, key), "expected a number");
  return v.get<double>();
}

int integer(const json& j, const std::string& key, const std::string& field, int fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer()) fail(join(field, key), "expected an integer");
  return v.get<int>();
}

std::string text(const json& j, const std::string& key, const std::string& field,
                 const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_string()) fail(join(field, key), "expected a string");
  return v.get<std::string>();
}

bool boolean(const json& j, const std::string& key, const std::string& field, bool fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_boolean()) fail(join(field, key), "expected true or false");
  return v.get<bool>();
}

std::vector<double> numbers(const json& j, const std::string& key, const std::string& field,
                            const std::vector<double>& fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_array()) fail(join(field, key), "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!v[k].is_number()) fail(join(field, key) + "[" + std::to_string(k) + "]", "expected a number");
    out.push_back(v[k].get<double>());
  }
  return out;
}

std::vector<int> integers(const json& j, const std::string& key, const std::string& field,
                          const std::vector<int>& fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_array()) fail(join(field, key), "expected an array of integers");
  std::vector<int> out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!v[k].is_number_integer()) {
      fail(join(field, key) + "[" + std::to_string(k) + "]", "expected an integer");
    }
    out.push_back(v[k].get<int>());
  }
  return out;
}

FourierSpec fourier(const json& j, const std::string& field) {
  if (j.is_number()) return FourierSpec{j.get<double>(), {}, {}};
  check_keys(j, field, {"a0", "cos", "sin"});
  FourierSpec s;
  s.a0 = number(j, "a0", field, 0.0);
  s.cos = numbers(j, "cos", field, {});
  s.sin = numbers(j, "sin", field, {});
  return s;
}

FourierSpec fourier_at(const json& parent, const std::string& key, const std::string& field,
                       const FourierSpec& fallback) {
  if (!parent.contains(key)) return fallback;
  return fourier(parent.at(key), join(field, key));
}

json fourier_json(const FourierSpec& s) {
  return json{{"a0", s.a0}, {"cos", s.cos}, {"sin", s.sin}};
}

CurveSpec curve(const json& parent, const std::string& key, const std::string& field,
                const CurveSpec& fallback) {
  if (!parent.contains(key)) return fallback;
  const std::string f = join(field, key);
  const json& j = parent.at(key);
  if (j.is_number()) return CurveSpec{j.get<double>(), {}, {}};
  check_keys(j, f, {"radius", "cos", "sin"});
  CurveSpec c;
  c.radius = number(j, "radius", f, fallback.radius);
  c.cos = numbers(j, "cos", f, {});
  c.sin = numbers(j, "sin", f, {});
  return c;
}

json curve_json(const CurveSpec& c) { return json{{"radius", c.radius}, {"cos", c.cos}, {"sin", c.sin}}; }

StarCurve make_curve(const CurveSpec& c, const Vec2& center) {
  return StarCurve::harmonic(c.radius, c.cos, c.sin, center);
}

}  // namespace

json to_json(const ExperimentConfig& c) {
  json truth = json::object();
  if (c.truth_flux_S) truth["flux_S"] = fourier_json(*c.truth_flux_S);
  if (c.truth_q_S) truth["q_S"] = fourier_json(*c.truth_q_S);
  return json{
      {"geometry",
       {{"center", {c.center.x(), c.center.y()}},
        {"inner", curve_json(c.inner)},
        {"outer", curve_json(c.outer)}}},
      {"metric",
       {{"kind", c.metric.kind},
        {"matrix",
         {{c.metric.matrix(0, 0), c.metric.matrix(0, 1)},
          {c.metric.matrix(1, 0), c.metric.matrix(1, 1)}}},
        {"amplitude", c.metric.amplitude}}},
      {"problem",
       {{"source", fourier_json(c.source)},
        {"absorption", c.absorption},
        {"kappa", c.kappa},
        {"q_S", fourier_json(c.q_S)},
        {"q_Gamma", fourier_json(c.q_Gamma)},
        {"flux_S", fourier_json(c.flux_S)},
        {"flux_Gamma", fourier_json(c.flux_Gamma)}}},
      {"discretization",
       {{"n_radial", c.n_radial}, {"n_angular", c.n_angular}, {"refinements", c.refinements}}},
      {"inversion",
       {{"backend", c.inversion_backend},
        {"cutoff", c.cutoff},
        {"alpha", c.alpha},
        {"noise", c.noise},
        {"seed", c.seed},
        {"max_iterations", c.max_iterations},
        {"tolerance", c.tolerance},
        {"data_file", c.data_file},
        {"data_refinement", c.data_refinement},
        {"truth", truth}}},
      {"stability",
       {{"backend", c.stability_backend},
        {"orders", c.orders},
        {"eta", c.eta},
        {"family", c.family},
        {"lipschitz_cutoff", c.lipschitz_cutoff},
        {"lipschitz_bound", c.lipschitz_bound},
        {"lipschitz_samples", c.lipschitz_samples},
        {"audits", c.audits}}},
      {"output", c.output},
  };
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  check_keys(j, "", {"geometry", "metric", "problem", "discretization", "inversion", "stability",
                     "output"});

  if (j.contains("geometry")) {
    const json& g = j.at("geometry");
    check_keys(g, "geometry", {"center", "inner", "outer"});
    if (g.contains("center")) {
      const auto v = numbers(g, "center", "geometry", {});
      if (v.size() != 2) fail("geometry.center", "expected [x, y]");
      c.center = Vec2(v[0], v[1]);
    }
    c.inner = curve(g, "inner", "geometry", c.inner);
    c.outer = curve(g, "outer", "geometry", c.outer);
  }

  if (j.contains("metric")) {
    const json& m = j.at("metric");
    check_keys(m, "metric", {"kind", "matrix", "amplitude"});
    c.metric.kind = text(m, "kind", "metric", c.metric.kind);
    if (m.contains("matrix")) {
      const json& a = m.at("matrix");
      if (!a.is_array() || a.size() != 2 || !a[0].is_array() || !a[1].is_array() ||
          a[0].size() != 2 || a[1].size() != 2) {
        fail("metric.matrix", "expected [[g11, g12], [g21, g22]]");
      }
      for (int r = 0; r < 2; ++r) {
        for (int s = 0; s < 2; ++s) {
          if (!a[r][s].is_number()) fail("metric.matrix", "entries must be numbers");
          c.metric.matrix(r, s) = a[r][s].get<double>();
        }
      }
    }
    c.metric.amplitude = number(m, "amplitude", "metric", c.metric.amplitude);
  }

  if (j.contains("problem")) {
    const json& p = j.at("problem");
    check_keys(p, "problem",
               {"source", "absorption", "kappa", "q_S", "q_Gamma", "flux_S", "flux_Gamma"});
    c.source = fourier_at(p, "source", "problem", c.source);
    c.absorption = number(p, "absorption", "problem", c.absorption);
    c.kappa = number(p, "kappa", "problem", c.kappa);
    c.q_S = fourier_at(p, "q_S", "problem", c.q_S);
    c.q_Gamma = fourier_at(p, "q_Gamma", "problem", c.q_Gamma);
    c.flux_S = fourier_at(p, "flux_S", "problem", c.flux_S);
    c.flux_Gamma = fourier_at(p, "flux_Gamma", "problem", c.flux_Gamma);
  }

  if (j.contains("discretization")) {
    const json& d = j.at("discretization");
    check_keys(d, "discretization", {"n_radial", "n_angular", "refinements"});
    c.n_radial = integer(d, "n_radial", "discretization", c.n_radial);
    c.n_angular = integer(d, "n_angular", "discretization", c.n_angular);
    c.refinements = integer(d, "refinements", "discretization", c.refinements);
  }

  if (j.contains("inversion")) {
    const json& v = j.at("inversion");
    check_keys(v, "inversion",
               {"backend", "cutoff", "alpha", "noise", "seed", "max_iterations", "tolerance",
                "data_file", "data_refinement", "truth"});
    c.inversion_backend = text(v, "backend", "inversion", c.inversion_backend);
    c.cutoff = number(v, "cutoff", "inversion", c.cutoff);
    c.alpha = number(v, "alpha", "inversion", c.alpha);
    c.noise = number(v, "noise", "inversion", c.noise);
    if (v.contains("seed")) {
      if (!v.at("seed").is_number_unsigned()) fail("inversion.seed", "expected a nonnegative integer");
      c.seed = v.at("seed").get<std::uint64_t>();
    }
    c.max_iterations = integer(v, "max_iterations", "inversion", c.max_iterations);
    c.tolerance = number(v, "tolerance", "inversion", c.tolerance);
    c.data_file = text(v, "data_file", "inversion", c.data_file);
    c.data_refinement = integer(v, "data_refinement", "inversion", c.data_refinement);
    if (v.contains("truth") && !v.at("truth").is_null()) {
      const json& t = v.at("truth");
      check_keys(t, "inversion.truth", {"flux_S", "q_S"});
      if (t.contains("flux_S")) c.truth_flux_S = fourier(t.at("flux_S"), "inversion.truth.flux_S");
      if (t.contains("q_S")) c.truth_q_S = fourier(t.at("q_S"), "inversion.truth.q_S");
    }
  }

  if (j.contains("stability")) {
    const json& s = j.at("stability");
    check_keys(s, "stability",
               {"backend", "orders", "eta", "family", "lipschitz_cutoff", "lipschitz_bound",
                "lipschitz_samples", "audits"});
    c.stability_backend = text(s, "backend", "stability", c.stability_backend);
    c.orders = integers(s, "orders", "stability", c.orders);
    c.eta = number(s, "eta", "stability", c.eta);
    c.family = integers(s, "family", "stability", c.family);
    c.lipschitz_cutoff = number(s, "lipschitz_cutoff", "stability", c.lipschitz_cutoff);
    c.lipschitz_bound = number(s, "lipschitz_bound", "stability", c.lipschitz_bound);
    c.lipschitz_samples = integer(s, "lipschitz_samples", "stability", c.lipschitz_samples);
    c.audits = boolean(s, "audits", "stability", c.audits);
  }

  c.output = text(j, "output", "", c.output);
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path.string() + "': " + e.what());
  }
  return config_from_json(j);
}

void save_config(const fs::path& path, const ExperimentConfig& config) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write config file '" + path.string() + "'");
  out << to_json(config).dump(2) << '\n';
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

// ---------------------------------------------------------------------------
// Validation

void validate_config(const ExperimentConfig& c) {
  auto finite = [](double x) { return std::isfinite(x); };
  if (!finite(c.center.x()) || !finite(c.center.y())) fail("geometry.center", "must be finite");
  if (!(c.inner.radius > 0.0)) fail("geometry.inner.radius", "must be positive");
  if (!(c.outer.radius > 0.0)) fail("geometry.outer.radius", "must be positive");
  try {
    (void)build_domain(c);
  } catch (const GeometryError& e) {
    fail("geometry", e.what());
  }

  if (c.metric.kind == "constant") {
    const Mat2& g = c.metric.matrix;
    if (g(0, 1) != g(1, 0)) fail("metric.matrix", "must be symmetric");
    if (!(g(0, 0) > 0.0) || !(g.determinant() > 0.0)) fail("metric.matrix", "must be positive definite");
  } else if (c.metric.kind == "conformal_sine") {
    if (!(std::abs(c.metric.amplitude) < 1.0)) fail("metric.amplitude", "must satisfy |a| < 1");
  } else if (c.metric.kind != "identity") {
    fail("metric.kind", "expected identity, constant or conformal_sine (got '" + c.metric.kind + "')");
  }

  if (!(c.absorption >= 0.0) || !finite(c.absorption)) fail("problem.absorption", "must be >= 0");
  if (!(c.kappa > 0.0) || !finite(c.kappa)) fail("problem.kappa", "must be finite and positive");
  auto check_q = [&](const FourierSpec& q, const std::string& field) {
    const double lo = q.sampled_min();
    const double hi = q.sampled_max();
    if (lo < 0.0) {
      std::ostringstream os;
      os << "must be nonnegative (minimum " << lo << ")";
      fail(field, os.str());
    }
    if (hi > c.kappa * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "exceeds kappa = " << c.kappa << " (maximum " << hi << ")";
      fail(field, os.str());
    }
  };
  check_q(c.q_S, "problem.q_S");
  check_q(c.q_Gamma, "problem.q_Gamma");
  if (c.q_S.is_zero() && c.q_Gamma.is_zero() && c.absorption == 0.0) {
    fail("problem", "q vanishes identically on the boundary and p = 0 (problem not coercive)");
  }

  if (c.n_radial < 2) fail("discretization.n_radial", "must be >= 2");
  if (c.n_angular < 8) fail("discretization.n_angular", "must be >= 8");
  if (c.refinements < 1 || c.refinements > 6) fail("discretization.refinements", "must be in 1..6");

  if (c.inversion_backend != "spectral" && c.inversion_backend != "fem") {
    fail("inversion.backend", "expected spectral or fem");
  }
  if (!(c.cutoff >= 0.0) || !finite(c.cutoff)) fail("inversion.cutoff", "must be >= 0");
  if (!(c.alpha >= 0.0) || !finite(c.alpha)) fail("inversion.alpha", "must be >= 0");
  if (!(c.noise >= 0.0) || !finite(c.noise)) fail("inversion.noise", "must be >= 0");
  if (c.max_iterations < 1) fail("inversion.max_iterations", "must be >= 1");
  if (!(c.tolerance > 0.0)) fail("inversion.tolerance", "must be positive");
  if (c.data_refinement < 1) fail("inversion.data_refinement", "must be >= 1");
  if (c.truth_q_S) check_q(*c.truth_q_S, "inversion.truth.q_S");

  if (c.stability_backend != "spectral" && c.stability_backend != "fem") {
    fail("stability.backend", "expected spectral or fem");
  }
  if (c.orders.empty()) fail("stability.orders", "must not be empty");
  for (std::size_t k = 0; k < c.orders.size(); ++k) {
    if (c.orders[k] < 0) fail("stability.orders", "entries must be >= 0");
    if (k && c.orders[k] <= c.orders[k - 1]) fail("stability.orders", "must be strictly ascending");
  }
  if (!(c.eta > 0.0 && c.eta < 0.25)) fail("stability.eta", "η ∈ (0, 1/4) required");
  if (c.family.empty()) fail("stability.family", "must not be empty");
  for (int n : c.family) {
    if (n < 0) fail("stability.family", "mode orders must be >= 0");
  }
  if (!(c.lipschitz_cutoff >= 0.0)) fail("stability.lipschitz_cutoff", "must be >= 0");
  if (!(c.lipschitz_bound >= 0.0)) fail("stability.lipschitz_bound", "must be >= 0");
  if (c.lipschitz_samples < 1) fail("stability.lipschitz_samples", "must be >= 1");
  if (c.output.empty()) fail("output", "must not be empty");
}

// ---------------------------------------------------------------------------
// Builders

AnnularDomain build_domain(const ExperimentConfig& c) {
  return AnnularDomain(make_curve(c.inner, c.center), make_curve(c.outer, c.center));
}

MetricTensor build_metric(const ExperimentConfig& c) {
  if (c.metric.kind == "constant") return MetricTensor::constant(c.metric.matrix);
  if (c.metric.kind == "conformal_sine") return MetricTensor::conformal_sine(c.metric.amplitude);
  return MetricTensor::identity();
}

std::function<double(const Vec2&)> build_source(const ExperimentConfig& c) {
  if (c.source.is_zero()) return {};
  const FourierSpec f = c.source;
  const Vec2 center = c.center;
  return [f, center](const Vec2& x) {
    const Vec2 d = x - center;
    return f(std::atan2(d.y(), d.x()));
  };
}

RobinProblem build_problem(const ExperimentConfig& c) {
  RobinProblem p;
  p.source = build_source(c);
  p.absorption = c.absorption;
  p.kappa = c.kappa;
  p.q_S = c.q_S.boundary();
  p.q_Gamma = c.q_Gamma.boundary();
  p.flux_S = c.flux_S.boundary();
  p.flux_Gamma = c.flux_Gamma.boundary();
  return p;
}

}  // namespace robinlab
