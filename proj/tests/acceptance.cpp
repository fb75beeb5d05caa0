#include <iostream>

#include "iso/verify.hpp"

int main() {
  auto results = iso::run_acceptance(std::cout);
  int failed = 0;
  for (const auto& r : results)
    if (!r.passed) ++failed;
  if (failed) std::cout << failed << " criteria failed\n";
  return failed == 0 ? 0 : 1;
}
