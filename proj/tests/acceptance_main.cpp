// Acceptance suite: runs every criterion at its stated tolerance and prints
// one pass/fail line per criterion. Exit status is the number of failures.

#include <iostream>

#include "polya/selftest.hpp"

int main() {
  polya::SelftestConfig cfg;
  auto rows = polya::run_acceptance(cfg);
  int failures = polya::print_acceptance(rows, std::cout);
  return failures == 0 ? 0 : 1;
}
