#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kgap/checks.hpp"
#include "kgap/suites.hpp"

namespace py = pybind11;
using namespace kgap;

namespace {

RunConfig config_from(const std::string& text) { return parse_config(json::parse(text)); }

std::string reports_json(const std::vector<EstimateReport>& rs) {
  json a = json::array();
  for (const auto& r : rs) a.push_back(r.to_json());
  return a.dump();
}

}  // namespace

PYBIND11_MODULE(_kgap, m) {
  m.doc() = "Collision operator checks, spectra and perturbative dynamics";
  py::register_exception<NumericalAbort>(m, "NumericalAbort", PyExc_RuntimeError);

  m.attr("SCHEMA") = kSchema;

  m.def("normalize_config", [](const std::string& text) { return config_from(text).to_json().dump(); },
        "Parse and validate a flat JSON config; returns it with every default filled in.");

  m.def("suite_names", &suite_names);

  m.def(
      "run_suite",
      [](const std::string& name, const std::string& text) {
        const RunConfig cfg = config_from(text);
        std::vector<EstimateReport> rs;
        {
          py::gil_scoped_release release;
          rs = run_suite(name, cfg);
        }
        return dump(envelope("verify", cfg.seed, cfg.to_json(), rs));
      },
      py::arg("name"), py::arg("config"));

  m.def(
      "collide",
      [](const std::string& text) {
        const RunConfig cfg = config_from(text);
        py::gil_scoped_release release;
        return reports_json(collide_reports(cfg));
      },
      py::arg("config"));

  m.def(
      "maxwellian",
      [](double Lv, int n) { return Eigen::VectorXd(maxwellian_values(build_grid(Lv, n))); },
      py::arg("velocity_half_width"), py::arg("n"));

  m.def(
      "nodes",
      [](double Lv, int n) {
        const VelocityGrid g = build_grid(Lv, n);
        Eigen::MatrixXd v(g.size(), 3);
        for (std::size_t p = 0; p < g.size(); ++p)
          for (int d = 0; d < 3; ++d) v(static_cast<Eigen::Index>(p), d) = g.node(p)[d];
        return v;
      },
      py::arg("velocity_half_width"), py::arg("n"));

  m.def(
      "collision",
      [](const Eigen::VectorXd& f, const Eigen::VectorXd& g, const std::string& text) {
        const RunConfig cfg = config_from(text);
        const VelocityGrid grid = build_grid(cfg.Lv, cfg.n);
        if (f.size() != static_cast<Eigen::Index>(grid.size()) || g.size() != f.size())
          throw InvalidArgument("collision: fields must have n^3 entries");
        const AngularQuadrature aq = build_angular(cfg.kernel, cfg.n_theta, cfg.n_phi);
        py::gil_scoped_release release;
        return Eigen::VectorXd(q_direct_real(grid, f, g, cfg.kernel, aq));
      },
      py::arg("f"), py::arg("g"), py::arg("config"),
      "Q(f, g) on the config's velocity grid (f at v*, g at v).");

  m.def(
      "spectrum",
      [](const std::string& text) {
        const RunConfig cfg = config_from(text);
        SpectrumOutput so;
        {
          py::gil_scoped_release release;
          so = run_spectrum(cfg);
        }
        const auto k = static_cast<Eigen::Index>(so.rows.size());
        Eigen::VectorXd re(k), im(k);
        std::vector<bool> cluster;
        for (Eigen::Index i = 0; i < k; ++i) {
          re[i] = so.rows[static_cast<std::size_t>(i)].re;
          im[i] = so.rows[static_cast<std::size_t>(i)].im;
          cluster.push_back(so.rows[static_cast<std::size_t>(i)].cluster);
        }
        py::dict d;
        d["re"] = re;
        d["im"] = im;
        d["cluster"] = cluster;
        d["gap"] = so.gap;
        d["reports"] = reports_json(so.reports);
        return d;
      },
      py::arg("config"));

  m.def(
      "evolve",
      [](const std::string& text) {
        const RunConfig cfg = config_from(text);
        EvolveOutput eo;
        {
          py::gil_scoped_release release;
          eo = run_evolve(cfg);
        }
        const auto& tr = eo.trajectory;
        py::dict d;
        d["t"] = tr.times;
        d["y_norm"] = tr.y_norm;
        d["weighted"] = tr.weighted;
        d["min_F"] = tr.min_F;
        d["max_F"] = tr.max_F;
        d["moment_drift"] = tr.moment_drift();
        d["summary"] = eo.summary.dump();
        d["reports"] = reports_json(eo.reports);
        if (eo.picard) d["picard"] = eo.picard->table().dump();
        return d;
      },
      py::arg("config"));
}
