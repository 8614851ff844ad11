#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>

#include "spherebispec/harness.hpp"
#include "spherebispec/jtests.hpp"
#include "spherebispec/wigner.hpp"

using namespace spherebispec;

TEST_CASE("statistic names round trip") {
  for (auto s : {Statistic::J1, Statistic::J2, Statistic::J3, Statistic::J4})
    CHECK(statistic_from_string(to_string(s)) == s);
  CHECK_THROWS_AS((void)statistic_from_string("J9"), std::invalid_argument);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(TestConfig({Statistic::J3, 0, 2, 0}).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(TestConfig({Statistic::J3, 50, 1, 0}).validate(),
                  std::invalid_argument);
  CHECK_NOTHROW(TestConfig({Statistic::J3, 50, 2, 2}).validate());
}

TEST_CASE("ordinate sets") {
  // pooled statistic over even l: triples (l-u, l, l+u)
  TestConfig cfg{Statistic::J1, 20, 2, 2};
  const auto ords = required_ordinates(cfg);
  for (const auto& o : ords) {
    CHECK(o[1] % 2 == 0);
    CHECK(o[0] <= o[1]);
    CHECK(o[2] == o[1] + (o[1] - o[0]));
    CHECK(triangle_ok(o[0], o[1], o[2]));
  }
  // separated statistic: triples (l0+u, l, l+l0+u)
  TestConfig cfg3{Statistic::J3, 20, 2, 1};
  for (const auto& o : required_ordinates(cfg3)) {
    CHECK(o[0] >= 2);
    CHECK(o[0] <= 3);
    CHECK(o[2] == o[1] + o[0]);
  }
}

TEST_CASE("process path on a zero input has sup 0 and p-value 1") {
  TestConfig cfg{Statistic::J3, 30, 2, 0};
  std::map<Ordinate, double> ihat;
  for (const auto& o : required_ordinates(cfg)) ihat[o] = 0.0;
  const auto path = j_process(cfg, ihat);
  CHECK(path.sup == 0.0);
  CHECK(path.p_value == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(path.r_grid.front() == 0.0);
  CHECK(path.r_grid.back() == 1.0);
}

TEST_CASE("missing ordinate is an error") {
  TestConfig cfg{Statistic::J3, 30, 2, 0};
  std::map<Ordinate, double> ihat;  // empty
  CHECK_THROWS_AS((void)j_process(cfg, ihat), std::invalid_argument);
}

TEST_CASE("constant positive input accumulates") {
  TestConfig cfg{Statistic::J3, 100, 2, 0};
  std::map<Ordinate, double> ihat;
  for (const auto& o : required_ordinates(cfg)) ihat[o] = 1.0;
  const auto path = j_process(cfg, ihat);
  // partial sums of n terms of 1/sqrt(L), sup at the end
  CHECK(path.sup ==
        doctest::Approx(double(ihat.size()) / std::sqrt(100.0)).epsilon(1e-12));
  CHECK(path.values.back() == doctest::Approx(path.sup).epsilon(1e-12));
}

TEST_CASE("limit-law tail probabilities") {
  CHECK(p_value_sup(0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(p_value_sup(1.959964) == doctest::Approx(0.05).epsilon(1e-5));
  CHECK(p_value_sup(1.644854) == doctest::Approx(0.10).epsilon(1e-5));
  CHECK_THROWS_AS((void)p_value_sup(-0.5), std::domain_error);
}

TEST_CASE("asymptotic critical values invert the tail") {
  CHECK(asymptotic_critical_value(0.05) == doctest::Approx(1.959964).epsilon(1e-5));
  CHECK(asymptotic_critical_value(0.10) == doctest::Approx(1.644854).epsilon(1e-5));
  CHECK(p_value_sup(asymptotic_critical_value(0.031)) ==
        doctest::Approx(0.031).epsilon(1e-10));
}

TEST_CASE("result json carries the run description") {
  TestConfig cfg{Statistic::J4, 40, 2, 1};
  std::map<Ordinate, double> ihat;
  for (const auto& o : required_ordinates(cfg)) ihat[o] = 0.1;
  const auto path = j_process(cfg, ihat);
  const auto json = result_json(cfg, path);
  CHECK(json.find("\"statistic\":\"J4\"") != std::string::npos);
  CHECK(json.find("\"L\":40") != std::string::npos);
  CHECK(json.find("\"sup\"") != std::string::npos);
  CHECK(json.find("\"p_value\"") != std::string::npos);
}

TEST_CASE("path csv") {
  TestConfig cfg{Statistic::J3, 20, 2, 0};
  std::map<Ordinate, double> ihat;
  for (const auto& o : required_ordinates(cfg)) ihat[o] = 0.5;
  const auto path = j_process(cfg, ihat);
  write_path_csv("path_io_test.csv", path);
  std::ifstream in("path_io_test.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "r,value");
}
