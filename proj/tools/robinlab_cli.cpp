// Command-line front end. Exit codes: 0 success, 1 configuration or input
// error, 2 solver failure, 3 acceptance failure.

#include "robinlab/acceptance.hpp"
#include "robinlab/config.hpp"
#include "robinlab/errors.hpp"
#include "robinlab/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using namespace robinlab;

enum Exit { kOk = 0, kConfig = 1, kSolver = 2, kAcceptance = 3 };

ExperimentConfig load(const std::string& path, const std::string& output) {
  ExperimentConfig c = path.empty() ? default_config() : load_config(path);
  if (!output.empty()) c.output = output;
  return c;
}

void print_files(const std::vector<std::filesystem::path>& files) {
  for (const auto& f : files) std::cout << "wrote " << f.string() << "\n";
}

void print_values(const std::vector<NamedValue>& values) {
  for (const auto& v : values) {
    std::cout << "  " << v.name << " = " << v.value;
    if (!v.note.empty()) std::cout << "  (" << v.note << ")";
    std::cout << "\n";
  }
}

template <class F>
int guarded(F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const IoError& e) {
    std::cerr << "file error: " << e.what() << "\n";
    return kConfig;
  } catch (const GeometryError& e) {
    std::cerr << "geometry error: " << e.what() << "\n";
    return kConfig;
  } catch (const Error& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kSolver;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return kSolver;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robin boundary value problems on annuli: forward solves, inversions, stability experiments"};
  app.require_subcommand(1);

  std::string config_path, output;
  auto add_run = [&](const std::string& name, const std::string& help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", config_path, "JSON configuration (defaults when omitted)");
    sub->add_option("-o,--output", output, "output directory, overrides the config");
    return sub;
  };
  CLI::App* forward = add_run("forward", "FEM forward solve with convergence table");
  CLI::App* flux = add_run("invert-flux", "linear flux reconstruction on S");
  CLI::App* robin = add_run("invert-robin", "corrosion coefficient reconstruction on S");
  CLI::App* stability = add_run("stability", "sigma_min sweep, log-modulus fit and audits");

  CLI::App* validate = app.add_subcommand("validate", "run the acceptance suite twice");
  std::string validate_dir = "validate_out";
  bool mutate = false;
  validate->add_option("-o,--output", validate_dir, "report directory");
  validate->add_flag("--unsymmetrize-stiffness", mutate,
                     "perturb the stiffness matrix (the energy identity criterion must fail)");

  CLI::App* defaults = app.add_subcommand("defaults", "print the default configuration");
  std::string defaults_file;
  defaults->add_option("-o,--output", defaults_file, "write to this file instead of stdout");

  CLI11_PARSE(app, argc, argv);

  if (defaults->parsed()) {
    return guarded([&] {
      if (defaults_file.empty()) {
        std::cout << to_json(default_config()).dump(2) << "\n";
      } else {
        save_config(defaults_file, default_config());
      }
      return int{kOk};
    });
  }
  if (validate->parsed()) {
    return guarded([&] {
      AcceptanceOptions opts;
      opts.unsymmetrize_stiffness = mutate;
      const auto results = run_validate(validate_dir, opts);
      bool ok = true;
      for (const auto& r : results) {
        std::cout << r.console_line() << "\n";
        ok = ok && r.pass;
      }
      std::cout << (ok ? "all criteria pass" : "acceptance failed") << "\n";
      return int{ok ? kOk : kAcceptance};
    });
  }
  return guarded([&] {
    const ExperimentConfig c = load(config_path, output);
    if (forward->parsed()) {
      const RunSummary s = run_forward(c);
      print_values(s.values);
      print_files(s.files);
    } else if (flux->parsed()) {
      const RunSummary s = run_invert_flux(c);
      print_values(s.values);
      print_files(s.files);
    } else if (robin->parsed()) {
      const RunSummary s = run_invert_robin(c);
      print_values(s.values);
      print_files(s.files);
    } else if (stability->parsed()) {
      const StabilityReport s = run_stability(c);
      for (const auto& v : s.verdicts) {
        std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << v.name << ": " << v.detail << "\n";
      }
      print_files(s.files);
    }
    return int{kOk};
  });
}
