#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lortz/bernoulli.hpp"
#include "lortz/dispersion.hpp"
#include "lortz/errors.hpp"
#include "lortz/expansion.hpp"
#include "lortz/io.hpp"
#include "lortz/solver.hpp"

namespace py = pybind11;
using namespace py::literals;
using namespace lortz;

namespace {

py::array_t<double> surface_array(const SurfaceField& f) {
  const Grid& g = *f.grid;
  py::array_t<double> a({g.n1(), g.n2()});
  std::copy(f.v.begin(), f.v.end(), a.mutable_data());
  return a;
}

py::array_t<double> scalar_array(const ScalarField& f) {
  const Grid& g = *f.grid;
  py::array_t<double> a({g.nz(), g.n1(), g.n2()});
  std::copy(f.v.begin(), f.v.end(), a.mutable_data());
  return a;
}

py::array_t<double> vector_array(const VectorField& f) {
  const Grid& g = *f.grid();
  py::array_t<double> a({3, g.nz(), g.n1(), g.n2()});
  double* p = a.mutable_data();
  for (int i = 0; i < 3; ++i) p = std::copy(f[i].v.begin(), f[i].v.end(), p);
  return a;
}

py::object to_py(const Json& j) { return py::module_::import("json").attr("loads")(dump_json(j, 0)); }

BernoulliFunctionH affine(const LatticeSpec& s, double beta) {
  return BernoulliFunctionH::affine(beta, s.lambda1 / c_star(s));
}

}  // namespace

PYBIND11_MODULE(_lortz, m) {
  m.doc() = "Lortz-ansatz solver for steady 3D capillary-gravity waves";
  m.attr("__version__") = kVersion;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<OutOfRegimeError>(m, "OutOfRegimeError", PyExc_RuntimeError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<LatticeSpec>(m, "LatticeSpec")
      .def(py::init([](double k1, double k2, double d, double g, double sigma, int n1, int n2, int nz) {
             LatticeSpec s = LatticeSpec::from_wavenumbers(k1, k2, d, g, sigma, n1, n2, nz);
             s.validate();
             return s;
           }),
           py::arg("kappa1") = 1.0, py::arg("kappa2") = 1.0, py::arg("d") = 1.0, py::arg("g") = 1.0,
           py::arg("sigma") = 1.0, py::arg("n1") = 16, py::arg("n2") = 16, py::arg("nz") = 17)
      .def_readwrite("lambda1", &LatticeSpec::lambda1)
      .def_readwrite("lambda2", &LatticeSpec::lambda2)
      .def_readwrite("d", &LatticeSpec::d)
      .def_readwrite("g", &LatticeSpec::g)
      .def_readwrite("sigma", &LatticeSpec::sigma)
      .def_readwrite("n1", &LatticeSpec::n1)
      .def_readwrite("n2", &LatticeSpec::n2)
      .def_readwrite("nz", &LatticeSpec::nz)
      .def_property_readonly("kappa1", &LatticeSpec::kappa1)
      .def_property_readonly("kappa2", &LatticeSpec::kappa2)
      .def("__repr__", [](const LatticeSpec& s) {
        return "LatticeSpec(kappa1=" + std::to_string(s.kappa1()) + ", kappa2=" + std::to_string(s.kappa2()) +
               ", d=" + std::to_string(s.d) + ", n=" + std::to_string(s.n1) + "x" + std::to_string(s.n2) + "x" +
               std::to_string(s.nz) + ")";
      });

  m.def("c_star", &c_star, py::arg("spec"));
  m.def("ell", &ell, py::arg("k1"), py::arg("k2"), py::arg("c"), py::arg("spec"));
  m.def(
      "kernel_scan", [](const LatticeSpec& s, int kmax) { return to_py(dispersion_json(kernel_scan(s, kmax))); },
      py::arg("spec"), py::arg("kmax") = 10);

  m.def(
      "tori_conditions",
      [](double k1, double k2, double d) {
        const ToriConditions t = tori_conditions(k1, k2, d);
        return py::dict("raw"_a = t.raw, "kappa"_a = t.kappa, "from_profiles"_a = t.from_profiles,
                        "margin"_a = t.margin, "upper_trivial"_a = t.upper_trivial);
      },
      py::arg("kappa1"), py::arg("kappa2"), py::arg("d"));
  m.def(
      "classify",
      [](const LatticeSpec& s, double beta) { return to_py(classification_json(classify(s, c_star(s), affine(s, beta)))); },
      py::arg("spec"), py::arg("beta") = 0.01);
  m.def(
      "level_surface_q2",
      [](const LatticeSpec& s, double K, int samples) {
        const LevelSurface ls = level_surface_q2(s, K, samples);
        py::array_t<double> x2(ls.x2.size()), psi(ls.psi.size());
        std::copy(ls.x2.begin(), ls.x2.end(), x2.mutable_data());
        std::copy(ls.psi.begin(), ls.psi.end(), psi.mutable_data());
        return py::make_tuple(x2, psi, to_string(ls.kind));
      },
      py::arg("spec"), py::arg("K"), py::arg("samples") = 201);

  m.def(
      "expand",
      [](const LatticeSpec& s, double beta) {
        const GridPtr g = make_grid(s);
        const ExpansionData e = expand(g, c_star(s), affine(s, beta));
        auto arr = [](const CosModes& c) { return std::vector<double>(c.begin(), c.end()); };
        return py::dict("c_star"_a = e.c, "U2"_a = e.U2, "hprime_q0"_a = e.hprime0, "Qprime"_a = e.Qprime,
                        "eta2_a"_a = arr(e.eta2.a), "ell"_a = arr(e.eta2.ell), "eta2_amp"_a = arr(e.eta2.amp),
                        "eta1"_a = surface_array(e.eta1), "eta2"_a = surface_array(e.eta2.eta2),
                        "q2"_a = scalar_array(e.q2), "omega2"_a = vector_array(e.omega2));
      },
      py::arg("spec"), py::arg("beta") = 0.01);

  m.def(
      "continue_branch",
      [](const LatticeSpec& s, double beta, const std::vector<double>& t_list) {
        std::vector<BranchPoint> br;
        {
          py::gil_scoped_release nogil;
          br = continue_branch(make_grid(s), affine(s, beta), t_list);
        }
        py::list out;
        for (const auto& b : br) {
          py::dict d = to_py(branch_point_json(b));
          d["eta"] = surface_array(b.eta);
          d["u"] = vector_array(b.u);
          d["q"] = scalar_array(b.tf.q);
          out.append(d);
        }
        return out;
      },
      py::arg("spec"), py::arg("beta") = 0.01, py::arg("t_list") = std::vector<double>{1e-3});

  m.def("parse_config", [](const std::string& text) { return to_py(config_json(parse_config(text))); },
        py::arg("yaml_text"));
  m.def("dump_config", [](const std::string& text) { return dump_config(parse_config(text)); },
        py::arg("yaml_text"), "Normalized YAML for a configuration text.");
}
