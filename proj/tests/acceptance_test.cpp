// Acceptance driver: one PASS/FAIL line per criterion, read from the JSON
// report that `qdeform verify` writes. Optional argument: the run q.

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

namespace {

using json = nlohmann::ordered_json;

struct Line {
  bool passed = true;
  std::vector<std::string> detail;
};

std::string verify_text(const std::string& q, int& status, std::string& err) {
  const char* argv[] = {"qdeform", "verify", "--q", q.c_str()};
  std::ostringstream out, e;
  status = qdeform::cli::main_entry(4, argv, out, e);
  err = e.str();
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  const std::string q = argc > 1 ? argv[1] : "2";
  const char* titles[] = {"",
                          "q-combinatorics identities",
                          "exponential identities",
                          "Jackson calculus",
                          "Fokker-Planck stationarity",
                          "free-particle quantum checks",
                          "spectral / Hilbert suite",
                          "classical limit",
                          "determinism and reporting"};

  const auto t0 = std::chrono::steady_clock::now();
  int status_a = 0, status_b = 0;
  std::string err_a, err_b;
  const std::string first = verify_text(q, status_a, err_a);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const std::string second = verify_text(q, status_b, err_b);

  json report;
  try {
    report = json::parse(first);
  } catch (const std::exception& e) {
    std::cout << "FAIL criterion 0: verify produced no JSON report (exit " << status_a << "): " << err_a << "\n";
    return 1;
  }

  std::map<int, Line> lines;
  for (int c = 1; c <= 8; ++c) lines[c];
  for (const auto& [name, s] : report["suites"].items()) {
    const int c = s["criterion"].get<int>();
    Line& l = lines[c];
    const bool ok = s["passed"].get<bool>();
    l.passed = l.passed && ok;
    std::ostringstream d;
    d << name << " " << qdeform::format_number(s["max_defect"].get<double>()) << " <= "
      << qdeform::format_number(s["tolerance"].get<double>()) << (ok ? "" : " (failed)");
    l.detail.push_back(d.str());
  }

  // Criteria with named suites that must be present.
  const std::map<int, std::vector<std::string>> required{
      {1, {"combinatorics.q_pascal", "combinatorics.binomial_symmetry", "combinatorics.basic_binomial_sum_vs_product",
           "combinatorics.inverse_basic_number_scaling"}},
      {2, {"exponential.inverse_identity", "exponential.jackson_eigen_relation", "exponential.jackson_antiderivative",
           "exponential.addition_law"}},
      {3, {"jackson.fundamental_theorem", "jackson.leibniz_dilate_first", "jackson.leibniz_dilate_second",
           "jackson.monomial_rules", "jackson.q_taylor_reconstruction"}},
      {4, {"fp.stationary_residual_argument_scaling", "fp.coefficient_oracle_argument_scaling"}},
      {5, {"quantum.free_particle_residual", "quantum.eq54_pointwise_defect"}},
      {6, {"spectral.biorthonormal_gram", "spectral.expansion_round_trip", "spectral.parseval",
           "spectral.eigenstate_norm_trace"}},
      {7, {"classical_limit.fp_stationary", "classical_limit.lowest_three_eigenvalues",
           "classical_limit.expectation_values", "classical_limit.convergence_order"}},
  };
  for (const auto& [c, names] : required) {
    for (const auto& n : names) {
      if (!report["suites"].contains(n)) {
        lines[c].passed = false;
        lines[c].detail.push_back("missing suite " + n);
      }
    }
  }

  // The literal convention is reported next to the scaled one and does not vanish.
  {
    Line& l = lines[4];
    const auto& surveys = report["surveys"];
    if (!surveys.contains("fp.stationary_residual_literal_qx") ||
        !surveys.contains("fp.literal_qx_coefficient_mismatch")) {
      l.passed = false;
      l.detail.push_back("literal_qx residual or coefficient oracle missing from the report");
    } else {
      double smallest = 1e300;
      for (const auto& [k, v] : surveys["fp.stationary_residual_literal_qx"]["values"].items()) {
        smallest = std::min(smallest, v.get<double>());
      }
      for (const auto& [k, v] : surveys["fp.literal_qx_coefficient_mismatch"]["values"].items()) {
        if (!(v.get<double>() > 0.0)) {
          l.passed = false;
          l.detail.push_back("coefficient oracle shows no mismatch at " + k);
        }
      }
      l.detail.push_back("literal_qx residual (reported) min " + qdeform::format_number(smallest));
      if (!(smallest > 1e-6)) {
        l.passed = false;
        l.detail.push_back("literal_qx residual unexpectedly vanishes");
      }
    }
  }

  {
    Line& l = lines[8];
    if (first != second || status_a != status_b) {
      l.passed = false;
      l.detail.push_back("reruns differ");
    } else {
      l.detail.push_back("two reruns byte-identical (" + std::to_string(first.size()) + " bytes)");
    }
    for (const char* key : {"convention", "quadrature_branch", "via_reciprocal.exponential_points",
                            "via_reciprocal.fp_stationary_points", "dropped_eigenpairs"}) {
      if (!report["flags"].contains(key)) {
        l.passed = false;
        l.detail.push_back(std::string("missing flag ") + key);
      }
    }
    const int expected = report["passed"].get<bool>() ? 0 : 2;
    if (status_a != expected) {
      l.passed = false;
      l.detail.push_back("exit status " + std::to_string(status_a) + ", expected " + std::to_string(expected));
    }
  }

  bool all = true;
  for (int c = 1; c <= 8; ++c) {
    const Line& l = lines[c];
    all = all && l.passed;
    std::cout << (l.passed ? "PASS" : "FAIL") << " criterion " << c << ": " << titles[c] << "\n";
    for (const auto& d : l.detail) std::cout << "    " << d << "\n";
  }
  std::cout << "verify at q = " << q << " took " << qdeform::format_number(std::round(seconds * 100) / 100)
            << " s (budget 60 s)\n";
  if (seconds > 60.0) {
    std::cout << "FAIL runtime budget\n";
    all = false;
  }
  return all ? EXIT_SUCCESS : EXIT_FAILURE;
}
