#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spherebispec/jtests.hpp"
#include "spherebispec/sht.hpp"
#include "spherebispec/spectra.hpp"

namespace spherebispec {

// Counter-derived substreams: the same (master, cell, rep) triple always
// yields the same sequence, independent of scheduling.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);
  static RngStream substream(std::uint64_t master, std::uint64_t cell,
                             std::uint64_t rep);

  std::uint64_t next_u64();
  double uniform();  // (0, 1)
  double normal();   // standard normal, Box-Muller

 private:
  std::uint64_t state_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

struct SpectrumModel {
  enum class Kind { power_law, sachs_wolfe_like };
  Kind kind = Kind::sachs_wolfe_like;
  double amplitude = 1.0;
  double alpha = 2.0;  // power_law exponent; ignored for sachs_wolfe_like

  PowerSpectrum spectrum(int l_min, int L) const;
};

double variance_of_field(const SpectrumModel& model, int L);

// Amplitude solved so that variance_of_field(model, L) == variance_target.
SpectrumModel normalized_model(SpectrumModel::Kind kind, double alpha, int L,
                               double variance_target);

HarmonicCoefficients sample_gaussian_alm(const PowerSpectrum& C, int L,
                                         RngStream& stream);

struct NonGaussianConfig {
  double f_nl = 0.0;
  double variance_target = 1e-8;
  // Default subtracts the realized quadrature mean of T^2, which keeps each
  // output exactly mean-free; set ensemble_mean to use the analytic E T^2.
  bool use_ensemble_mean = false;
  double ensemble_et2 = 0.0;
  int oversample = 2;
};

HarmonicCoefficients make_nongaussian_alm(const HarmonicCoefficients& alm,
                                          const NonGaussianConfig& cfg,
                                          int L_out);

// Leading-order theoretical bispectrum of the quadratic model.
double sachs_wolfe_bispectrum(int l1, int l2, int l3, const PowerSpectrum& C,
                              double f_nl, double G);

struct StudyManifest {
  std::vector<Statistic> statistics{Statistic::J3};
  std::vector<int> Ls{250};
  std::vector<int> Ks{0};
  int l0 = 2;
  std::vector<double> f_nls{0.0};
  int R = 200;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::vector<double> levels{0.10, 0.05};
  SpectrumModel::Kind kind = SpectrumModel::Kind::sachs_wolfe_like;
  double alpha = 2.0;
  double variance_target = 1e-8;
  int l_min = 1;
  double G = 1.0;

  // Plain key=value text, '#' comments, comma-separated lists.
  static StudyManifest parse(const std::string& text);
  static StudyManifest parse_file(const std::string& path);
  void validate() const;
};

struct StudyCell {
  Statistic statistic;
  int L = 0;
  int K = 0;
  double f_nl = 0.0;
  double level = 0.0;
  double asym_crit = 0.0;      // threshold from the limiting law
  double asym_rate = 0.0;      // rejection rate against asym_crit
  double emp_crit = 0.0;       // empirical quantile (f_nl = 0 cells only; else NaN)
  double tab_rate = 0.0;       // rate against the f_nl = 0 empirical quantile; NaN if absent
  double se = 0.0;             // binomial standard error of asym_rate
};

struct StudyReport {
  StudyManifest manifest;
  std::vector<StudyCell> cells;
  // sup statistics per (statistic, K, L, f_nl), in replication order
  struct SupSeries {
    Statistic statistic;
    int L, K;
    double f_nl;
    std::vector<double> sups;
  };
  std::vector<SupSeries> series;
};

// Threshold x with 2(1 - Phi(x)) = level.
double asymptotic_critical_value(double level);

StudyReport run_study(const StudyManifest& m);
StudyReport run_size_study(const StudyManifest& m);   // requires 0 in f_nls
StudyReport run_power_study(const StudyManifest& m);  // requires a nonzero f_nl

void write_report_csv(const std::string& path, const StudyReport& r);
void write_report_json(const std::string& path, const StudyReport& r);

// Worker count: SPHEREBISPEC_THREADS if set, else hardware concurrency.
int worker_count();

}  // namespace spherebispec
