#include "robinlab/config.hpp"
#include "robinlab/errors.hpp"
#include "robinlab/report.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>

using namespace robinlab;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("robinlab_config_" + name);
  fs::remove_all(p);
  return p;
}

std::string config_error(const json& j) {
  try {
    config_from_json(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("configuration round-trips") {
  ExperimentConfig c = default_config();
  c.q_S = FourierSpec{0.5, {0.0, 0.3}, {0.1}};
  c.metric.kind = "conformal_sine";
  c.metric.amplitude = 0.2;
  c.truth_q_S = FourierSpec{0.5, {0.1}, {}};
  c.orders = {2, 4, 8};
  c.seed = 123456789012345ULL;
  c.noise = 0.1 + 0.2;
  const json j = to_json(c);
  CHECK(to_json(config_from_json(j)) == j);

  const fs::path dir = scratch("roundtrip");
  fs::create_directories(dir);
  save_config(dir / "c.json", c);
  CHECK(to_json(load_config(dir / "c.json")) == j);
  CHECK(load_config(dir / "c.json").noise == c.noise);
}

TEST_CASE("partial files fall back to the defaults") {
  const ExperimentConfig c = config_from_json(json::parse(R"({"problem": {"kappa": 2.0, "q_S": 0.4}})"));
  CHECK(c.kappa == 2.0);
  CHECK(c.q_S.a0 == 0.4);
  CHECK(c.n_radial == default_config().n_radial);
}

TEST_CASE("field-precise rejections") {
  CHECK(config_error(json::parse(R"({"problem": {"q_S": -0.5}})")).find("problem.q_S") != std::string::npos);
  const std::string eta = config_error(json::parse(R"({"stability": {"eta": 0.3}})"));
  CHECK(eta.find("stability.eta") != std::string::npos);
  CHECK(eta.find("(0, 1/4)") != std::string::npos);
  CHECK(config_error(json::parse(R"({"geometry": {"inner": {"radius": 2}, "outer": {"radius": 1}}})"))
            .find("geometry") != std::string::npos);
  CHECK(config_error(json::parse(R"({"problem": {"q_S": 2.0, "kappa": 1.0}})")).find("problem.q_S") !=
        std::string::npos);
  CHECK(config_error(json::parse(R"({"problem": {"colour": 1}})")).find("problem.colour") !=
        std::string::npos);
  CHECK(config_error(json::parse(R"({"discretization": {"n_radial": 0}})")).find("discretization.n_radial") !=
        std::string::npos);
  CHECK(config_error(json::parse(R"({"stability": {"orders": [3, 2]}})")).find("stability.orders") !=
        std::string::npos);
  CHECK(config_error(json::parse(R"({"inversion": {"backend": "magic"}})")).find("inversion.backend") !=
        std::string::npos);
  CHECK(config_error(json::parse(R"({"problem": {"q_S": 0, "q_Gamma": 0}})")) != "");
}

TEST_CASE("missing or malformed files") {
  CHECK_THROWS_AS(load_config("/nonexistent/robinlab.json"), IoError);
  const fs::path dir = scratch("malformed");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.json") << "{ not json";
  CHECK_THROWS_AS(load_config(dir / "bad.json"), ConfigError);
}

TEST_CASE("problem construction") {
  ExperimentConfig c = default_config();
  c.flux_S = FourierSpec{0.0, {1.0}, {}};
  const RobinProblem p = build_problem(c);
  const Mesh m = discretize(build_domain(c), build_metric(c), 2, 16);
  const BoundaryField f = p.flux_S.on(m.inner);
  for (std::size_t k = 0; k < f.size(); ++k) {
    CHECK(f[k] == doctest::Approx(std::cos(m.inner->angles[k])));
  }
  CHECK_FALSE(build_source(c));
}

TEST_CASE("numbers are written to round-trip") {
  for (double x : {0.1, 1.0 / 3.0, std::numbers::pi * 1e-200, -2.5e300}) {
    CHECK(std::stod(format_number(x)) == x);
  }
  CHECK(format_number(std::nan("")) == "nan");
}

TEST_CASE("CSV rows must match the header") {
  const fs::path dir = scratch("csv");
  fs::create_directories(dir);
  CsvWriter w(dir / "a.csv", {"x", "y"});
  w.row(std::vector<double>{1.0, 2.0});
  CHECK_THROWS_AS(w.row(std::vector<double>{1.0}), Error);
}

TEST_CASE("Cauchy CSV round-trips through the data reader") {
  const Mesh m = discretize(AnnularDomain::circles(1.0, 2.0), MetricTensor::identity(), 2, 64);
  const CauchyData d = make_cauchy(BoundaryField::sample(m.outer, [](double t) { return std::sin(t); }),
                                   BoundaryField::sample(m.outer, [](double t) { return std::cos(2 * t); }));
  const fs::path dir = scratch("cauchy");
  fs::create_directories(dir);
  write_cauchy_csv(dir / "c.csv", d);
  CHECK(slurp(dir / "c.csv").rfind("theta,trace,conormal,tangential_derivative\n", 0) == 0);
  const CauchyData back = cauchy_from_table(read_cauchy_csv(dir / "c.csv"), m.outer);
  CHECK((back.trace - d.trace).l2_norm() < 1e-14);
  CHECK((back.conormal - d.conormal).l2_norm() < 1e-14);

  std::ofstream(dir / "bad.csv") << "theta,trace,conormal\n0,1,2\n0,1,2\n1,1,1\n";
  CHECK_THROWS_AS(read_cauchy_csv(dir / "bad.csv"), IoError);
  CHECK_THROWS_AS(read_cauchy_csv(dir / "missing.csv"), IoError);
}

TEST_CASE("output directory must be writable") {
  const fs::path dir = scratch("blocked");
  fs::create_directories(dir);
  std::ofstream(dir / "file") << "x";
  CHECK_THROWS_AS(ensure_output_dir(dir / "file" / "sub"), IoError);
  CHECK_NOTHROW(ensure_output_dir(dir / "fresh"));
  CHECK(fs::is_directory(dir / "fresh"));
}
