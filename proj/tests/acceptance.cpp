// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
//
//   acceptance [--seed N] [--json path]

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

#include "bsdyn/acceptance.hpp"

using namespace bsdyn;
using namespace bsdyn::acceptance;

int main(int argc, char** argv) {
  std::uint64_t seed = kDefaultSeed;
  std::string json_path;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--seed") && i + 1 < argc) {
      seed = std::strtoull(argv[++i], nullptr, 10);
    } else if (!std::strcmp(argv[i], "--json") && i + 1 < argc) {
      json_path = argv[++i];
    } else {
      std::fprintf(stderr, "usage: %s [--seed N] [--json path]\n", argv[0]);
      return 2;
    }
  }

  int failures = 0;
  const auto report = reproduce_all({}, seed, [&](const CriterionResult& r) {
    // The time limit is part of every criterion.
    const bool in_time = r.seconds <= kTimeLimitSeconds;
    const bool ok = r.passed && in_time;
    failures += ok ? 0 : 1;
    std::printf("[%s] criterion %2d  %-40s %7.2fs\n", ok ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds);
    if (!r.error.empty()) std::printf("        error: %s\n", r.error.c_str());
    if (!in_time) std::printf("        exceeded %.0fs\n", kTimeLimitSeconds);
    for (const auto& c : r.checks) {
      if (c.at("passed").get<bool>()) continue;
      std::printf("        failed check: %s\n", c.dump().c_str());
    }
    std::fflush(stdout);
  });

  if (!json_path.empty()) atomic_write(json_path, report.to_json().dump(2) + "\n");
  std::printf("%zu criteria, %d failed, report hash %s\n", report.results.size(), failures,
              report_hash(report.deterministic()).c_str());
  return failures == 0 ? 0 : 1;
}
