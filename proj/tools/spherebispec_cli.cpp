#include <CLI11.hpp>

#include <complex>
#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "spherebispec/detail/fileio.hpp"
#include "spherebispec/diagrams.hpp"
#include "spherebispec/errors.hpp"
#include "spherebispec/harness.hpp"
#include "spherebispec/jtests.hpp"
#include "spherebispec/spectra.hpp"
#include "spherebispec/wigner.hpp"

namespace sb = spherebispec;

namespace {

int run(int argc, char** argv) {
  CLI::App app{"spherical bispectrum toolkit"};
  app.require_subcommand(1);

  // ---- wigner ----
  auto* wigner = app.add_subcommand("wigner", "evaluate coupling symbols");
  std::vector<int> args3j, args6j;
  wigner->add_option("--3j", args3j, "l1 l2 l3 m1 m2 m3")->expected(6);
  wigner->add_option("--6j", args6j, "a b c d e f")->expected(6);
  bool exact = false;
  wigner->add_flag("--exact", exact, "use the exact-rational evaluation");
  wigner->callback([&] {
    if (args3j.empty() == args6j.empty())
      throw CLI::ValidationError("wigner", "pass exactly one of --3j / --6j");
    double v;
    if (!args3j.empty()) {
      sb::TripleLM t{args3j[0], args3j[1], args3j[2],
                     args3j[3], args3j[4], args3j[5]};
      v = exact ? sb::wigner_3j_exact(t) : sb::wigner_3j(t);
    } else {
      sb::SixJArguments s{args6j[0], args6j[1], args6j[2],
                          args6j[3], args6j[4], args6j[5]};
      v = exact ? sb::wigner_6j_exact(s) : sb::wigner_6j(s);
    }
    std::printf("%.15g\n", v);
  });

  // ---- synth ----
  auto* synth = app.add_subcommand("synth", "alm -> grid");
  std::string synth_alm, synth_out;
  int synth_over = 1;
  synth->add_option("--alm", synth_alm, "input coefficients CSV")->required();
  synth->add_option("--out", synth_out, "output grid CSV")->required();
  synth->add_option("--oversample", synth_over,
                    "grid oversampling factor (2 resolves squared fields)");
  synth->callback([&] {
    const auto alm = sb::read_alm_csv(synth_alm);
    sb::write_grid_csv(synth_out,
                       sb::synthesize(alm, sb::GridSpec{alm.L, synth_over}));
  });

  // ---- analyze ----
  auto* analyze = app.add_subcommand("analyze", "grid -> alm");
  std::string an_grid, an_out;
  int an_L = 0, an_lmin = 1;
  analyze->add_option("--grid", an_grid, "input grid CSV")->required();
  analyze->add_option("--L", an_L, "band limit")->required();
  analyze->add_option("--lmin", an_lmin,
                      "lowest multipole kept; default 1 drops the kinematic "
                      "dipole convention's l=0 mean (use 0 to keep it)");
  analyze->add_option("--out", an_out, "output coefficients CSV")->required();
  analyze->callback([&] {
    sb::write_alm_csv(an_out,
                      sb::analyze(sb::read_grid_csv(an_grid), an_L, an_lmin));
  });

  // ---- spectrum ----
  auto* spectrum = app.add_subcommand(
      "spectrum", "estimate C_l from alm, or tabulate a model spectrum");
  std::string sp_alm, sp_out, sp_model;
  double sp_alpha = 2.0, sp_amp = 1.0;
  int sp_L = 0, sp_lmin = 1;
  spectrum->add_option("--alm", sp_alm, "estimate from this coefficients CSV");
  spectrum->add_option("--spectrum", sp_model, "model kind: power_law or sw");
  spectrum->add_option("--alpha", sp_alpha, "power_law exponent");
  spectrum->add_option("--amp", sp_amp, "model amplitude");
  spectrum->add_option("--L", sp_L, "band limit for model tabulation");
  spectrum->add_option("--lmin", sp_lmin, "lowest multipole (default 1, no dipole removal implied for spectra)");
  spectrum->add_option("--out", sp_out, "output CSV l,cl")->required();
  spectrum->callback([&] {
    if (sp_alm.empty() == sp_model.empty())
      throw CLI::ValidationError("spectrum", "pass exactly one of --alm / --spectrum");
    if (!sp_alm.empty()) {
      const auto alm = sb::read_alm_csv(sp_alm);
      sb::PowerSpectrum C(alm.l_min, alm.L);
      for (int l = alm.l_min; l <= alm.L; ++l) C.at(l) = sb::estimate_cl(alm, l);
      sb::write_spectrum_csv(sp_out, C);
    } else {
      if (sp_L < 1) throw CLI::ValidationError("spectrum", "--L required for a model");
      sb::SpectrumModel model;
      model.kind = (sp_model == "power_law")
                       ? sb::SpectrumModel::Kind::power_law
                       : sb::SpectrumModel::Kind::sachs_wolfe_like;
      if (sp_model != "power_law" && sp_model != "sw" &&
          sp_model != "sachs_wolfe_like")
        throw CLI::ValidationError("spectrum", "unknown model " + sp_model);
      model.amplitude = sp_amp;
      model.alpha = sp_alpha;
      sb::write_spectrum_csv(sp_out, model.spectrum(sp_lmin, sp_L));
    }
  });

  // ---- bispectrum ----
  auto* bisp = app.add_subcommand("bispectrum", "bispectrum ordinates from alm");
  std::string bi_alm, bi_out, bi_kind = "Ihat", bi_cl;
  std::vector<int> bi_l;
  bisp->add_option("--alm", bi_alm, "input coefficients CSV")->required();
  bisp->add_option("--l", bi_l, "l1 l2 l3")->expected(3)->required();
  bisp->add_option("--kind", bi_kind, "raw | I | Ihat (default Ihat)");
  bisp->add_option("--cl", bi_cl, "known spectrum CSV (required for kind I)");
  bisp->add_option("--out", bi_out, "append-style output CSV (stdout if absent)");
  bisp->callback([&] {
    const auto alm = sb::read_alm_csv(bi_alm);
    sb::WignerRowCache cache;
    double v;
    if (bi_kind == "raw") {
      v = sb::estimate_bispectrum(alm, bi_l[0], bi_l[1], bi_l[2], cache);
    } else if (bi_kind == "I") {
      if (bi_cl.empty())
        throw CLI::ValidationError("bispectrum", "--cl required for kind I");
      v = sb::normalized_bispectrum(alm, bi_l[0], bi_l[1], bi_l[2],
                                    sb::read_spectrum_csv(bi_cl), cache);
    } else if (bi_kind == "Ihat") {
      v = sb::normalized_bispectrum_hat(alm, bi_l[0], bi_l[1], bi_l[2], cache);
    } else {
      throw CLI::ValidationError("bispectrum", "unknown kind " + bi_kind);
    }
    char line[160];
    std::snprintf(line, sizeof line, "%d,%d,%d,%s,%.17g\n", bi_l[0], bi_l[1],
                  bi_l[2], bi_kind.c_str(), v);
    if (bi_out.empty()) {
      std::printf("l1,l2,l3,kind,value\n%s", line);
    } else {
      sb::detail::write_file_atomic(bi_out,
                                    std::string("l1,l2,l3,kind,value\n") + line);
    }
  });

  // ---- test ----
  auto* test = app.add_subcommand("test", "sup statistic of a J-process");
  std::string t_alm, t_stat = "J3", t_path;
  int t_L = 0, t_l0 = 2, t_K = 0;
  test->add_option("--alm", t_alm, "input coefficients CSV")->required();
  test->add_option("--stat", t_stat, "J1 | J2 | J3 | J4");
  test->add_option("--L", t_L, "band limit")->required();
  test->add_option("--l0", t_l0, "base multipole (>= 2; the dipole l=1 is excluded by convention)");
  test->add_option("--K", t_K, "pooling parameter");
  test->add_option("--out", t_path, "write the process path CSV here");
  test->callback([&] {
    const auto alm = sb::read_alm_csv(t_alm);
    sb::TestConfig cfg{sb::statistic_from_string(t_stat), t_L, t_l0, t_K};
    sb::WignerRowCache cache;
    std::map<sb::Ordinate, double> ihat;
    for (const auto& o : sb::required_ordinates(cfg))
      ihat[o] = sb::normalized_bispectrum_hat(alm, o[0], o[1], o[2], cache);
    const auto path = sb::j_process(cfg, ihat);
    if (!t_path.empty()) sb::write_path_csv(t_path, path);
    std::printf("%s\n", sb::result_json(cfg, path).c_str());
  });

  // ---- oracle ----
  auto* oracle = app.add_subcommand("oracle", "diagram-expansion moments");
  int o_p = 1;
  std::vector<int> o_l;
  bool o_paired = false;
  oracle->add_option("--p", o_p, "half the diagram row count (1 or 2)");
  oracle->add_option("--l", o_l, "l1 l2 l3")->expected(3)->required();
  oracle->add_flag("--paired", o_paired, "sum paired diagrams only");
  oracle->callback([&] {
    const double v = o_paired
                         ? sb::paired_family_value(o_p, o_l[0], o_l[1], o_l[2])
                         : sb::moment_bruteforce(o_p, o_l[0], o_l[1], o_l[2]);
    std::printf("%.15g\n", v);
  });

  // ---- study ----
  auto* study = app.add_subcommand("study", "Monte Carlo size/power study");
  std::string st_manifest, st_out;
  std::uint64_t st_seed = 0;
  study->add_option("--manifest", st_manifest, "key=value manifest file")->required();
  study->add_option("--seed", st_seed, "master seed (mandatory: no wall-clock default)")
      ->required();
  study->add_option("--out", st_out, "output prefix (.csv and .json)")->required();
  study->callback([&] {
    sb::StudyManifest m = sb::StudyManifest::parse_file(st_manifest);
    m.seed = st_seed;
    m.seed_set = true;
    bool nonzero = false;
    for (double f : m.f_nls) nonzero = nonzero || f != 0.0;
    const auto rep = nonzero ? sb::run_power_study(m) : sb::run_size_study(m);
    sb::write_report_csv(st_out + ".csv", rep);
    sb::write_report_json(st_out + ".json", rep);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const sb::guard_error& e) {
    std::cerr << "guard: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
