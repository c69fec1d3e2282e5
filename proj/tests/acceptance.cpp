// Runs every acceptance criterion once and prints one verdict line per criterion,
// followed by the individual checks behind it.

#include "dppla/verify.hpp"

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>

int main(int argc, char** argv) {
  const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 0;
  int failed = 0;
  for (const auto& c : dppla::criteria()) {
    std::vector<dppla::CheckResult> checks;
    std::string error;
    try {
      checks = c.run(dppla::derive_seed(seed, static_cast<std::uint64_t>(c.id)));
    } catch (const std::exception& e) {
      error = e.what();
    }
    bool pass = error.empty() && !checks.empty();
    for (const auto& r : checks) pass = pass && r.passed;
    if (!pass) ++failed;
    std::printf("ACCEPTANCE %2d %s  %s\n", c.id, pass ? "PASS" : "FAIL", c.title.c_str());
    if (!error.empty()) std::printf("    error: %s\n", error.c_str());
    for (const auto& r : checks) {
      std::printf("    [%s] %s: %.6g %s %.6g (%.2fs)%s%s\n", r.passed ? "ok" : "xx", r.name.c_str(), r.observed,
                  r.relation.c_str(), r.expected, r.seconds, r.detail.empty() ? "" : "  ", r.detail.c_str());
    }
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed\n", dppla::criteria().size(), failed);
  return failed == 0 ? 0 : 1;
}
