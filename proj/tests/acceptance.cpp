// Prints one PASS/FAIL line per acceptance criterion; exits nonzero on failure.

#include "leelab/acceptance.hpp"

#include <cstdio>
#include <string>

int main(int argc, char** argv) {
  const bool verbose = argc > 1 && std::string(argv[1]) == "-v";
  const auto suite = leelab::acceptance::run_suite(true, [verbose](const leelab::acceptance::CriterionResult& c) {
    std::printf("%s criterion %d: %s (%.2f s)\n", c.passed ? "PASS" : "FAIL", c.id, c.title.c_str(), c.seconds);
    if (verbose || !c.passed) {
      for (const auto& check : c.details.value("checks", nlohmann::json::array())) {
        std::printf("    %s %s\n", check.value("passed", false) ? "ok " : "BAD", check.dump().c_str());
      }
    }
    std::fflush(stdout);
  });
  std::printf("%s: %zu criteria in %.1f s\n", suite.passed() ? "ALL PASS" : "FAILURES", suite.criteria.size(),
              suite.seconds);
  return suite.passed() ? 0 : 1;
}
