#include "disslab/config.hpp"
#include "disslab/construction_one.hpp"
#include "disslab/construction_two.hpp"
#include "disslab/experiments.hpp"
#include "disslab/lp.hpp"
#include "disslab/mixing.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace disslab;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// square 2-D sample array on [0, 2pi)^2
SpectralField field(const Array &a) {
  if (a.ndim() != 2 || a.shape(0) != a.shape(1))
    throw py::value_error("expected a square 2-D array");
  Grid g(2, static_cast<int>(a.shape(0)));
  g.validate();
  Samples s(a.data(), a.data() + a.size());
  return transform(g, {s});
}

Array samples(const SpectralField &f) {
  auto s = inverse(f);
  Array out({f.grid.n, f.grid.n});
  std::copy(s[0].begin(), s[0].end(), out.mutable_data());
  return out;
}

py::object to_py(const nlohmann::json &j) { return py::module_::import("json").attr("loads")(j.dump()); }

} // namespace

PYBIND11_MODULE(_disslab, m) {
  m.doc() = "dissipation and mixing laboratory";
  m.attr("__version__") = version_string();

  // library errors keep their exit-code class
  static py::exception<Error> err(m, "DisslabError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p)
        std::rethrow_exception(p);
    } catch (const Error &e) {
      py::set_error(err, (e.code() + ": " + e.what()).c_str());
    }
  });

  m.def("shell", [](const Array &a, int q, int base) { return samples(LPBank(base).shell(field(a), q)); },
        py::arg("u"), py::arg("q"), py::arg("base") = 2);
  m.def("low_pass", [](const Array &a, int q, int base) { return samples(LPBank(base).low_pass(field(a), q)); },
        py::arg("u"), py::arg("q"), py::arg("base") = 2);
  m.def("q_max", [](int n, int base) { return LPBank(base).q_max(Grid(2, n)); }, py::arg("n"), py::arg("base") = 2);
  m.def(
      "shell_spectrum",
      [](const Array &a, double s, double p, int base) {
        ShellSpectrum sp = shell_spectrum(field(a), s, p, LPBank(base));
        return py::make_tuple(sp.lambda, sp.value);
      },
      py::arg("u"), py::arg("s"), py::arg("p"), py::arg("base") = 2);
  m.def("lp_norm", [](const Array &a, double p) { return lp_norm(field(a), p); });
  m.def("hm1_norm", [](const Array &a) {
    SpectralField f = field(a);
    f.c[0][0] = 0.0;
    return hm1_norm(f);
  }, "H^{-1} norm of the mean-free part");

  m.def("weights", [](const std::string &spec, int count) {
    WeightSequence w = WeightSequence::parse(spec);
    std::vector<double> v;
    for (int n = 1; n <= count; ++n)
      v.push_back(w(n));
    return v;
  }, py::arg("spec"), py::arg("count"));

  m.def("checkerboard", [](int lambda, int n) { return samples(checkerboard(lambda, Grid(2, n))); });
  m.def(
      "mix_stage",
      [](const Array &a, int stage, int base) {
        SpectralField rho = field(a);
        MixingProfile prof = MixingProfile::standard();
        MixerStage st = build_stage(stage, base, rho.grid, prof);
        MixerResult r = run_stage(st, rho, prof, false);
        return py::make_tuple(samples(r.rho), r.contraction, r.l2_drift);
      },
      py::arg("rho"), py::arg("stage"), py::arg("base") = 2);

  m.def(
      "schedule",
      [](int mm, const std::string &weights, int base) {
        TimeSchedule s = make_schedule(mm, WeightSequence::parse(weights), base, false);
        py::dict d;
        d["nodes"] = std::vector<double>(s.nodes.begin() + 1, s.nodes.end());
        d["tau"] = s.tau;
        d["nu"] = s.nu;
        d["Lambda"] = s.Lambda;
        d["valid"] = s.valid;
        d["diagnostic"] = s.diagnostic;
        return d;
      },
      py::arg("m"), py::arg("weights") = "inverse_square", py::arg("base") = 2);
  m.def(
      "cutoffs",
      [](double beta, double eps, int N, int n_max, const std::vector<double> &t) {
        CutoffSet c = make_cutoffs(beta, eps, N, n_max);
        std::vector<double> s;
        for (double x : t)
          s.push_back(c.sum_sq(x));
        return py::make_tuple(c.T, s);
      },
      py::arg("beta"), py::arg("eps"), py::arg("N"), py::arg("n_max"), py::arg("t"));

  // command surface: config path (or "default") plus key=value overrides
  auto run = [](const std::string &cmd) {
    return [cmd](const std::string &out, const std::string &config, const std::vector<std::string> &set) {
      Config cfg = load_config(config, set, cmd == "construction1" ? "construction1"
                                            : cmd == "construction2" ? "construction2"
                                            : cmd == "mix"           ? "mixing"
                                                                     : "lp");
      RunReport r = cmd == "mix"             ? cmd_mix(cfg, out)
                    : cmd == "construction1" ? cmd_construction1(cfg, out)
                                             : cmd_construction2(cfg, out);
      r.write(out);
      return to_py(r.json());
    };
  };
  for (const char *c : {"mix", "construction1", "construction2"}) {
    std::string name = c;
    m.def(name.c_str(), run(name), py::arg("out"), py::arg("config") = "default",
          py::arg("set") = std::vector<std::string>{});
  }
  m.def(
      "lp_analyze",
      [](const std::string &snapshot, const std::string &out, const std::string &config,
         const std::vector<std::string> &set) {
        RunReport r = cmd_lp_analyze(load_config(config, set, "lp"), out, snapshot);
        r.write(out);
        return to_py(r.json());
      },
      py::arg("snapshot"), py::arg("out"), py::arg("config") = "default", py::arg("set") = std::vector<std::string>{});
  m.def("config_hash", [](const std::string &config, const std::vector<std::string> &set) {
    return load_config(config, set).hash();
  }, py::arg("config") = "default", py::arg("set") = std::vector<std::string>{});
}
