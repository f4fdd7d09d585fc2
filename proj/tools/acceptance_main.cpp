// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.

#include "dtrimer/acceptance.hpp"
#include "dtrimer/parallel.hpp"

#include <iostream>

int main() {
  dtrimer::AcceptanceOptions opt;
  opt.workers = dtrimer::resolve_workers();
  bool all = true;
  for (const auto& id : dtrimer::criteria_in_scope(dtrimer::Scope::All)) {
    const auto r = dtrimer::run_criterion(id, opt);
    std::cout << dtrimer::format_result(r) << std::endl;
    all = all && r.passed;
  }
  std::cout << (all ? "ALL PASS" : "SOME FAILED") << std::endl;
  return all ? 0 : 1;
}
