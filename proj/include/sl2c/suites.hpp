#pragma once

// Verification suites shared by the CLI and the acceptance binary.

#include <string>
#include <vector>

#include "sl2c/diagram.hpp"
#include "sl2c/spectral.hpp"

namespace sl2c {

struct Check {
  std::string id;
  double residual = 0;
  double tol = 0;
  bool pass = false;
  std::string detail;
  bool info = false;  // reported, not counted in the verdict
};

struct SuiteReport {
  std::string name;
  std::vector<std::pair<std::string, double>> inputs;  // configuration echo
  std::vector<Check> checks;
  bool ok() const;
};

struct SuiteConfig {
  int N = 2;
  Spin spin{0, 0.3};
  uint64_t seed = 42;
  double tol = -1;   // > 0 overrides every check tolerance
  int samples = 100; // random points per pointwise identity
  Exec exec = Exec::parallel;
};

std::vector<std::string> suite_names();  // primitives, algebra, kernels, rules, appendixB, eigenfunctions
// Throws std::invalid_argument for an unknown suite.
SuiteReport run_suite(const std::string& name, const SuiteConfig& cfg);

// Individual groups, also used directly by the acceptance binary.
std::vector<Check> primitive_checks(const SuiteConfig& cfg);
std::vector<Check> algebra_checks(int N);
std::vector<Check> kernel_checks(int N, const SuiteConfig& cfg);
std::vector<Check> rule_checks(const SuiteConfig& cfg, int draws = 3);
std::vector<Check> appendixB_checks(const SuiteConfig& cfg);
// B_2(u) Psi_B = p (u - x1) Psi_B and the Psi_A scaling law at N = 2, by quadrature.
std::vector<Check> eigenfunction_checks(const SuiteConfig& cfg);

// text: one PASS/FAIL line per check; json: one record per line; csv: header + rows.
std::string render(const SuiteReport& r, const std::string& format);

}  // namespace sl2c
