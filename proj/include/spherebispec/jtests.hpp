#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

namespace spherebispec {

enum class Statistic { J1, J2, J3, J4 };

Statistic statistic_from_string(const std::string& s);
std::string to_string(Statistic s);

struct TestConfig {
  Statistic statistic = Statistic::J3;
  int L = 0;
  int l0 = 2;   // base multipole; the dipole l = 1 is conventionally skipped
  int K = 0;    // pooling parameter

  void validate() const;
};

// Step-function partial-sum path of a J-process over r in [0,1].
struct TestProcessPath {
  std::vector<double> r_grid;
  std::vector<double> values;
  double sup = 0.0;
  double p_value = 1.0;
};

using Ordinate = std::array<int, 3>;  // (l1, l2, l3), ascending

// Exactly the normalized-bispectrum arguments the configured sum needs.
// Pooled triples that would violate the triangle rule are dropped.
std::vector<Ordinate> required_ordinates(const TestConfig& cfg);

TestProcessPath j_process(const TestConfig& cfg,
                          const std::map<Ordinate, double>& ihat);

double sup_statistic(const TestProcessPath& path);

// 2(1 - Phi(x)) from the one-sided sup limit law.
double p_value_sup(double x);

// CSV with header "r,value".
void write_path_csv(const std::string& path, const TestProcessPath& p);

// JSON object {statistic, L, l0, K, sup, p_value}.
std::string result_json(const TestConfig& cfg, const TestProcessPath& p);

}  // namespace spherebispec
