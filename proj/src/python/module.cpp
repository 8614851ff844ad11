#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>

#include "spherebispec/diagrams.hpp"
#include "spherebispec/errors.hpp"
#include "spherebispec/harness.hpp"
#include "spherebispec/jtests.hpp"
#include "spherebispec/spectra.hpp"
#include "spherebispec/wigner.hpp"

namespace py = pybind11;
namespace sb = spherebispec;

PYBIND11_MODULE(_spherebispec, m) {
  m.doc() = "angular bispectrum toolkit";

  py::register_exception<sb::guard_error>(m, "GuardError");

  m.def(
      "wigner_3j",
      [](int l1, int l2, int l3, int m1, int m2, int m3) {
        return sb::wigner_3j({l1, l2, l3, m1, m2, m3});
      },
      py::arg("l1"), py::arg("l2"), py::arg("l3"), py::arg("m1"), py::arg("m2"),
      py::arg("m3"));
  m.def(
      "wigner_6j",
      [](int a, int b, int c, int d, int e, int f) {
        return sb::wigner_6j({a, b, c, d, e, f});
      },
      py::arg("a"), py::arg("b"), py::arg("c"), py::arg("d"), py::arg("e"),
      py::arg("f"));

  py::class_<sb::HarmonicCoefficients>(m, "HarmonicCoefficients")
      .def(py::init<>())
      .def_readwrite("l_min", &sb::HarmonicCoefficients::l_min)
      .def_readwrite("L", &sb::HarmonicCoefficients::L)
      .def("get", &sb::HarmonicCoefficients::get, py::arg("l"), py::arg("m"));

  py::class_<sb::SphereGrid>(m, "SphereGrid")
      .def_readonly("n_theta", &sb::SphereGrid::n_theta)
      .def_readonly("n_phi", &sb::SphereGrid::n_phi)
      .def(
          "at",
          [](const sb::SphereGrid& g, int i, int j) { return g.at(i, j); },
          py::arg("i"), py::arg("j"));

  m.def(
      "synthesize",
      [](const sb::HarmonicCoefficients& alm, int oversample) {
        return sb::synthesize(alm, sb::GridSpec{alm.L, oversample});
      },
      py::arg("alm"), py::arg("oversample") = 1);
  m.def("analyze", &sb::analyze, py::arg("grid"), py::arg("L"),
        py::arg("l_min") = 1);

  py::class_<sb::PowerSpectrum>(m, "PowerSpectrum")
      .def(py::init<int, int>(), py::arg("l_min"), py::arg("L"))
      .def_readonly("l_min", &sb::PowerSpectrum::l_min)
      .def_readonly("L", &sb::PowerSpectrum::L)
      .def("at", [](const sb::PowerSpectrum& C, int l) { return C.at(l); },
           py::arg("l"));

  m.def("estimate_cl", &sb::estimate_cl, py::arg("alm"), py::arg("l"));
  m.def(
      "estimate_bispectrum",
      [](const sb::HarmonicCoefficients& alm, int l1, int l2, int l3) {
        sb::WignerRowCache cache;
        return sb::estimate_bispectrum(alm, l1, l2, l3, cache);
      },
      py::arg("alm"), py::arg("l1"), py::arg("l2"), py::arg("l3"));
  m.def(
      "normalized_bispectrum_hat",
      [](const sb::HarmonicCoefficients& alm, int l1, int l2, int l3) {
        sb::WignerRowCache cache;
        return sb::normalized_bispectrum_hat(alm, l1, l2, l3, cache);
      },
      py::arg("alm"), py::arg("l1"), py::arg("l2"), py::arg("l3"));

  m.def("moment_I2", &sb::moment_I2, py::arg("l1"), py::arg("l2"),
        py::arg("l3"));
  m.def("moment_I4_offdiag", &sb::moment_I4_offdiag, py::arg("l1"),
        py::arg("l2"), py::arg("l3"));
  m.def("moment_Ihat", &sb::moment_Ihat, py::arg("l1"), py::arg("l2"),
        py::arg("l3"), py::arg("p") = 1);
  m.def("moment_bruteforce", &sb::moment_bruteforce, py::arg("p"),
        py::arg("l1"), py::arg("l2"), py::arg("l3"));

  m.def(
      "sup_test",
      [](const sb::HarmonicCoefficients& alm, const std::string& stat, int L,
         int l0, int K) {
        sb::TestConfig cfg{sb::statistic_from_string(stat), L, l0, K};
        sb::WignerRowCache cache;
        std::map<sb::Ordinate, double> ihat;
        for (const auto& o : sb::required_ordinates(cfg))
          ihat[o] = sb::normalized_bispectrum_hat(alm, o[0], o[1], o[2], cache);
        const auto path = sb::j_process(cfg, ihat);
        return py::make_tuple(path.sup, path.p_value);
      },
      py::arg("alm"), py::arg("stat"), py::arg("L"), py::arg("l0") = 2,
      py::arg("K") = 0,
      "Sup of the chosen partial-sum statistic; returns (sup, p_value).");

  m.def(
      "sample_gaussian_alm",
      [](const sb::PowerSpectrum& C, int L, std::uint64_t seed) {
        sb::RngStream stream(seed);
        return sb::sample_gaussian_alm(C, L, stream);
      },
      py::arg("C"), py::arg("L"), py::arg("seed"));

  m.def(
      "model_spectrum",
      [](const std::string& kind, double amplitude, double alpha, int l_min,
         int L) {
        sb::SpectrumModel model;
        model.kind = kind == "power_law" ? sb::SpectrumModel::Kind::power_law
                                         : sb::SpectrumModel::Kind::sachs_wolfe_like;
        model.amplitude = amplitude;
        model.alpha = alpha;
        return model.spectrum(l_min, L);
      },
      py::arg("kind"), py::arg("amplitude") = 1.0, py::arg("alpha") = 2.0,
      py::arg("l_min") = 1, py::arg("L") = 100);

  m.def("read_alm_csv", &sb::read_alm_csv, py::arg("path"));
  m.def("write_alm_csv", &sb::write_alm_csv, py::arg("path"), py::arg("alm"));
}
