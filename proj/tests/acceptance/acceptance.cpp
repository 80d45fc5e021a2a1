// Full acceptance suite: one PASS/FAIL line per criterion.
// Usage: acceptance [output_dir] [config.json]

#include <iostream>
#include <string>

#include "hybridlab/config.hpp"
#include "hybridlab/io.hpp"
#include "hybridlab/validation.hpp"

using namespace hybridlab;

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : "acceptance_out";
  try {
    const ExperimentConfig cfg = argc > 2 ? load_config(argv[2]) : ExperimentConfig{};
    const ValidationReport rep = run_validation(
        cfg, dir, [](const CheckResult& c) { std::cout << format_check(c) << std::endl; });
    write_report_json(join_path(dir, "report.json"), rep);
    std::size_t passed = 0;
    for (const auto& c : rep.checks) passed += c.passed;
    std::cout << passed << "/" << rep.checks.size() << " criteria passed" << std::endl;
    return rep.passed() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "acceptance: " << e.what() << '\n';
    return 2;
  }
}
