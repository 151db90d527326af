// Runs every acceptance criterion and prints one line per criterion.

#include "skewcrit/acceptance.hpp"

#include <cstdlib>
#include <iostream>

int main() {
  skewcrit::AcceptanceOptions opts;
  if (const char* s = std::getenv("SKEWCRIT_SEED")) opts.seed = std::strtoull(s, nullptr, 10);
  const auto rep = skewcrit::run_acceptance(skewcrit::Suite::All, opts);
  for (const auto& r : rep.results) std::cout << skewcrit::summary_line(r) << "\n";
  std::cout << (rep.all_pass ? "ALL PASS" : "FAILURES PRESENT") << "\n";
  return rep.all_pass ? 0 : 1;
}
