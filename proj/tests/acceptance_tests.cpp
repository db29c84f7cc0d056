// Runs the acceptance suite (twice, for the determinism criterion) and prints
// one verdict line per criterion. Exit status 1 on any failure.

#include "robinlab/acceptance.hpp"

#include <iostream>

int main(int argc, char** argv) {
  const std::filesystem::path out = argc > 1 ? argv[1] : "acceptance_out";
  bool ok = true;
  try {
    for (const auto& r : robinlab::run_validate(out)) {
      std::cout << r.console_line() << "\n";
      ok = ok && r.pass;
    }
  } catch (const std::exception& e) {
    std::cout << "acceptance suite aborted: " << e.what() << "\n";
    return 1;
  }
  std::cout << (ok ? "all acceptance criteria pass" : "acceptance failed") << "\n";
  return ok ? 0 : 1;
}
