#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(ROBINLAB_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const std::string& name, const std::string& body) {
  const fs::path p = fs::temp_directory_path() / ("robinlab_cli_" + name + ".json");
  std::ofstream(p) << body;
  return p;
}

}  // namespace

TEST_CASE("defaults subcommand") {
  CHECK(run("defaults") == 0);
  const fs::path out = fs::temp_directory_path() / "robinlab_cli_defaults.json";
  CHECK(run("defaults -o " + out.string()) == 0);
  CHECK(run("forward -c " + out.string() + " -o " + (fs::temp_directory_path() / "robinlab_cli_fwd").string()) == 0);
}

TEST_CASE("configuration errors exit with 1") {
  CHECK(run("stability -c " + write_config("eta", R"({"stability": {"eta": 0.3}})").string()) == 1);
  CHECK(run("forward -c " + write_config("q", R"({"problem": {"q_S": -1}})").string()) == 1);
  CHECK(run("forward -c /nonexistent/config.json") == 1);
  CHECK(run("invert-robin -c " +
            write_config("nofile", R"({"inversion": {"data_file": "/nonexistent/data.csv"}})").string()) == 1);
}

TEST_CASE("shipped configurations run") {
  const std::string dir = ROBINLAB_CONFIGS;
  const std::string out = (fs::temp_directory_path() / "robinlab_cli_runs").string();
  CHECK(run("forward -c " + dir + "/radial.json -o " + out + "/radial") == 0);
  CHECK(run("invert-flux -c " + dir + "/flux.json -o " + out + "/flux") == 0);
  CHECK(run("invert-robin -c " + dir + "/corrosion.json -o " + out + "/corrosion") == 0);
  CHECK(run("invert-robin -c " + dir + "/corrosion_noisy.json -o " + out + "/noisy") == 0);
  CHECK(run("stability -c " + dir + "/sweep.json -o " + out + "/sweep") == 0);
}

TEST_CASE("a mutated validate run exits with 3") {
  const std::string out = (fs::temp_directory_path() / "robinlab_cli_mutated").string();
  CHECK(run("validate --unsymmetrize-stiffness -o " + out) == 3);
}
