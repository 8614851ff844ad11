#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>

#include "spherebispec/harness.hpp"

using namespace spherebispec;

TEST_CASE("rng streams are reproducible and decorrelated") {
  RngStream a = RngStream::substream(42, 3, 17);
  RngStream b = RngStream::substream(42, 3, 17);
  RngStream c = RngStream::substream(42, 3, 18);
  bool same = true, diff = false;
  for (int i = 0; i < 64; ++i) {
    auto x = a.next_u64();
    same = same && (x == b.next_u64());
    diff = diff || (x != c.next_u64());
  }
  CHECK(same);
  CHECK(diff);
}

TEST_CASE("uniform stays inside the open interval") {
  RngStream s(9);
  for (int i = 0; i < 10000; ++i) {
    double u = s.uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("normal moments") {
  RngStream s(1234);
  const int n = 200000;
  double m1 = 0, m2 = 0;
  for (int i = 0; i < n; ++i) {
    double x = s.normal();
    m1 += x;
    m2 += x * x;
  }
  m1 /= n;
  m2 /= n;
  CHECK(std::abs(m1) < 0.01);
  CHECK(std::abs(m2 - 1.0) < 0.02);
}

TEST_CASE("field variance identity") {
  SpectrumModel m;
  m.kind = SpectrumModel::Kind::power_law;
  m.amplitude = 1.0;
  m.alpha = 2.0;
  const int L = 30;
  double expect = 0;
  const auto C = m.spectrum(1, L);
  for (int l = 1; l <= L; ++l) expect += (2.0 * l + 1) * C.at(l);
  expect /= 4 * std::acos(-1.0);
  CHECK(variance_of_field(m, L) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("amplitude normalization hits the variance target") {
  const auto m = normalized_model(SpectrumModel::Kind::sachs_wolfe_like, 2.0, 100, 1e-8);
  CHECK(variance_of_field(m, 100) == doctest::Approx(1e-8).epsilon(1e-6));
}

TEST_CASE("gaussian sample matches its spectrum on average") {
  const auto model = normalized_model(SpectrumModel::Kind::power_law, 2.0, 20, 1.0);
  const auto C = model.spectrum(1, 20);
  RngStream s(777);
  double acc = 0;
  const int reps = 2000, l = 10;
  for (int r = 0; r < reps; ++r) {
    const auto alm = sample_gaussian_alm(C, 20, s);
    acc += estimate_cl(alm, l);
  }
  acc /= reps;
  // relative MC error ~ sqrt(2/((2l+1) reps)) ~ 0.7%
  CHECK(acc == doctest::Approx(C.at(l)).epsilon(0.05));
}

TEST_CASE("quadratic perturbation is exact at f_nl = 0 and scales with f_nl") {
  const auto model = normalized_model(SpectrumModel::Kind::sachs_wolfe_like, 2.0, 24, 1e-8);
  const auto C = model.spectrum(1, 24);
  RngStream s(31);
  const auto alm = sample_gaussian_alm(C, 24, s);
  NonGaussianConfig cfg0;
  cfg0.f_nl = 0.0;
  const auto same = make_nongaussian_alm(alm, cfg0, 24);
  double worst = 0;
  for (int l = 1; l <= 24; ++l)
    for (int m = 0; m <= l; ++m)
      worst = std::max(worst, std::abs(same.at(l, m) - alm.at(l, m)));
  CHECK(worst == 0.0);

  NonGaussianConfig cfg1;
  cfg1.f_nl = 100.0;
  NonGaussianConfig cfg2;
  cfg2.f_nl = 200.0;
  const auto p1 = make_nongaussian_alm(alm, cfg1, 24);
  const auto p2 = make_nongaussian_alm(alm, cfg2, 24);
  // the added component is linear in f_nl
  worst = 0;
  double scale = 0;
  for (int l = 1; l <= 24; ++l)
    for (int m = 0; m <= l; ++m) {
      const auto d1 = p1.at(l, m) - alm.at(l, m);
      const auto d2 = p2.at(l, m) - alm.at(l, m);
      worst = std::max(worst, std::abs(d2 - 2.0 * d1));
      scale = std::max(scale, std::abs(d1));
    }
  CHECK(scale > 0.0);
  CHECK(worst < 1e-12 * std::max(1.0, scale));
}

TEST_CASE("theoretical bispectrum of the quadratic model") {
  const auto model = normalized_model(SpectrumModel::Kind::sachs_wolfe_like, 2.0, 50, 1e-8);
  const auto C = model.spectrum(1, 50);
  CHECK(sachs_wolfe_bispectrum(2, 3, 5, C, 0.0, 1.0) == 0.0);
  CHECK_THROWS(sachs_wolfe_bispectrum(2, 3, 6, C, 100.0, 1.0));  // triangle
  CHECK_THROWS(sachs_wolfe_bispectrum(2, 3, 4, C, 100.0, 1.0));  // odd parity
  // sign alternation along (2, l, l+2)
  const double b1 = sachs_wolfe_bispectrum(2, 10, 12, C, 100.0, 1.0);
  const double b2 = sachs_wolfe_bispectrum(2, 11, 13, C, 100.0, 1.0);
  CHECK(b1 * b2 < 0.0);
}

TEST_CASE("manifest parsing") {
  std::ofstream("manifest_io_test.cfg")
      << "# comment line\n"
         "statistics = J3, J1\n"
         "L = 50, 100\n"
         "K = 0, 2\n"
         "f_nl = 0\n"
         "R = 8\n"
         "seed = 99\n"
         "levels = 0.10, 0.05\n"
         "spectrum = power_law\n"
         "alpha = 2.0\n"
         "variance_target = 1e-8\n";
  const auto m = StudyManifest::parse_file("manifest_io_test.cfg");
  CHECK(m.statistics.size() == 2);
  CHECK(m.statistics[0] == Statistic::J3);
  CHECK(m.Ls == std::vector<int>{50, 100});
  CHECK(m.Ks == std::vector<int>{0, 2});
  CHECK(m.R == 8);
  CHECK(m.seed == 99);
  CHECK(m.seed_set);
  CHECK(m.kind == SpectrumModel::Kind::power_law);
  CHECK_NOTHROW(m.validate());
  CHECK_THROWS_AS(StudyManifest::parse("R = 4\n").validate(),
                  std::invalid_argument);  // seed missing
}

TEST_CASE("small study is deterministic and produces calibrated cells") {
  StudyManifest m;
  m.statistics = {Statistic::J3};
  m.Ls = {40};
  m.Ks = {0};
  m.f_nls = {0.0};
  m.R = 16;
  m.seed = 4242;
  m.seed_set = true;
  const auto r1 = run_size_study(m);
  const auto r2 = run_size_study(m);
  REQUIRE(r1.series.size() == 1);
  CHECK(r1.series[0].sups == r2.series[0].sups);
  CHECK(r1.cells.size() == 2);  // two levels
  for (const auto& cell : r1.cells) {
    CHECK(cell.asym_rate >= 0.0);
    CHECK(cell.asym_rate <= 1.0);
    CHECK(cell.se >= 0.0);  // exactly 0 when no rep rejects
  }
  write_report_csv("report_io_test.csv", r1);
  write_report_json("report_io_test.json", r1);
  std::ifstream in("report_io_test.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "statistic,L,K,f_nl,level,asym_crit,asym_reject_rate,emp_crit,"
        "tab_reject_rate,binom_se");
}
