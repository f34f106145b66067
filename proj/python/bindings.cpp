#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "boltz/collision.hpp"
#include "boltz/config.hpp"
#include "boltz/estimates.hpp"
#include "boltz/solver.hpp"

namespace py = pybind11;
using namespace boltz;

namespace {

Vec to_vec(const std::vector<double>& v) {
  Vec out{0, 0, 0};
  for (std::size_t i = 0; i < v.size() && i < 3; ++i) out[i] = v[i];
  return out;
}

}  // namespace

PYBIND11_MODULE(boltzlab, mod) {
  mod.doc() = "non-cutoff collision operator: grids, operator evaluations, "
              "time marching and the measurable a-priori estimates";

  py::class_<VelocityGrid>(mod, "VelocityGrid")
      .def_static("make", &VelocityGrid::make, py::arg("dim"), py::arg("n"), py::arg("L"))
      .def_readonly("dim", &VelocityGrid::dim)
      .def_readonly("n", &VelocityGrid::n)
      .def_readonly("L", &VelocityGrid::L)
      .def_readonly("h", &VelocityGrid::h)
      .def("axis", &VelocityGrid::axis)
      .def("__repr__", [](const VelocityGrid& g) {
        return "VelocityGrid(dim=" + std::to_string(g.dim) + ", n=" + std::to_string(g.n) +
               ", L=" + std::to_string(g.L) + ")";
      });

  py::class_<DistributionFunction>(mod, "DistributionFunction")
      .def_readonly("grid", &DistributionFunction::grid)
      .def_property(
          "values", [](const DistributionFunction& f) { return f.values; },
          [](DistributionFunction& f, const std::vector<double>& v) {
            if (v.size() != f.values.size())
              throw py::value_error("values size mismatch");
            f.values = v;
          })
      .def("interpolate",
           [](const DistributionFunction& f, const std::vector<double>& v) {
             return interpolate(f, to_vec(v));
           })
      .def("__len__", [](const DistributionFunction& f) { return f.values.size(); });

  mod.def("zeros", &zeros);
  mod.def(
      "maxwellian",
      [](const VelocityGrid& g, double mass, double temperature,
         const std::vector<double>& center) {
        return maxwellian(g, mass, temperature, to_vec(center));
      },
      py::arg("grid"), py::arg("mass") = 1.0, py::arg("temperature") = 1.0,
      py::arg("center") = std::vector<double>{});
  mod.def("bimodal", &bimodal, py::arg("grid"), py::arg("mass") = 1.0,
          py::arg("temperature") = 0.5, py::arg("separation") = 3.0);
  mod.def(
      "ball_indicator",
      [](const VelocityGrid& g, const std::vector<double>& center, double radius,
         double height) { return ball_indicator(g, to_vec(center), radius, height); },
      py::arg("grid"), py::arg("center"), py::arg("radius"), py::arg("height") = 1.0);
  mod.def("gaussian_mixture", &gaussian_mixture, py::arg("grid"), py::arg("seed"),
          py::arg("components"));

  py::class_<MacroscopicState>(mod, "MacroscopicState")
      .def_readonly("t", &MacroscopicState::t)
      .def_readonly("mass", &MacroscopicState::mass)
      .def_readonly("energy", &MacroscopicState::energy)
      .def_readonly("entropy", &MacroscopicState::entropy);
  mod.def("moments", &moments, py::arg("f"), py::arg("t") = 0.0);
  mod.def("entropy_abs", &entropy_abs);

  py::class_<CrossSection>(mod, "CrossSection")
      .def_readonly("dim", &CrossSection::dim)
      .def_readonly("gamma", &CrossSection::gamma)
      .def_readonly("nu", &CrossSection::nu)
      .def("b", &CrossSection::b)
      .def("product_form", &CrossSection::product_form);
  mod.def("reference_b", &reference_b, py::arg("gamma"), py::arg("nu"), py::arg("dim"));
  mod.def("from_inverse_power", &from_inverse_power, py::arg("s"), py::arg("dim"));

  py::class_<QuadParams>(mod, "QuadParams")
      .def(py::init<>())
      .def_static("defaults", &QuadParams::defaults)
      .def_readwrite("plane_spacing", &QuadParams::plane_spacing)
      .def_readwrite("n_dir", &QuadParams::n_dir)
      .def_readwrite("n_rad", &QuadParams::n_rad)
      .def_readwrite("y_min", &QuadParams::y_min)
      .def_readwrite("n_theta", &QuadParams::n_theta)
      .def_readwrite("clamp_g", &QuadParams::clamp_g);
  mod.def("solver_quad", &solver_quad, py::arg("dim"));

  py::class_<CollisionField>(mod, "CollisionField")
      .def_readonly("q1", &CollisionField::q1)
      .def_readonly("q2", &CollisionField::q2)
      .def_readonly("q1_diag", &CollisionField::q1_diag)
      .def_readonly("q2_coef", &CollisionField::q2_coef)
      .def_readonly("excluded_bound_max", &CollisionField::excluded_bound_max)
      .def_readonly("btilde_coef", &CollisionField::btilde_coef);
  mod.def("apply_collision", &apply_collision, py::arg("xs"), py::arg("f"), py::arg("g"),
          py::arg("quad"), py::arg("threads") = 1,
          py::call_guard<py::gil_scoped_release>());
  mod.def(
      "q_direct",
      [](const CrossSection& xs, const DistributionFunction& f,
         const DistributionFunction& g, const std::vector<double>& v,
         const QuadParams& qp) { return q_direct(xs, f, g, to_vec(v), qp).value; },
      py::arg("xs"), py::arg("f"), py::arg("g"), py::arg("v"), py::arg("quad"));
  mod.def(
      "kernel_Kf",
      [](const CrossSection& xs, const DistributionFunction& f,
         const std::vector<double>& v, const std::vector<double>& vprime,
         const QuadParams& qp) { return kernel_Kf(xs, f, to_vec(v), to_vec(vprime), qp).value; },
      py::arg("xs"), py::arg("f"), py::arg("v"), py::arg("vprime"), py::arg("quad"));

  py::enum_<Scheme>(mod, "Scheme").value("euler", Scheme::euler).value("ssprk2", Scheme::ssprk2);

  py::class_<SolverConfig>(mod, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("dt", &SolverConfig::dt)
      .def_readwrite("t_end", &SolverConfig::t_end)
      .def_readwrite("scheme", &SolverConfig::scheme)
      .def_readwrite("stride", &SolverConfig::stride)
      .def_readwrite("sigma_cfl", &SolverConfig::sigma_cfl)
      .def_readwrite("project_moments", &SolverConfig::project_moments)
      .def_readwrite("record_max", &SolverConfig::record_max)
      .def_readwrite("monitor_radius", &SolverConfig::monitor_radius)
      .def_readwrite("threads", &SolverConfig::threads)
      .def_readwrite("quad", &SolverConfig::quad);

  py::class_<MaxRecord>(mod, "MaxRecord")
      .def_readonly("t", &MaxRecord::t)
      .def_readonly("m", &MaxRecord::m)
      .def_readonly("q1", &MaxRecord::q1)
      .def_readonly("q2", &MaxRecord::q2)
      .def_readonly("c_tilde", &MaxRecord::c_tilde)
      .def_readonly("C_tilde", &MaxRecord::C_tilde)
      .def_readonly("q1_nonpositive", &MaxRecord::q1_nonpositive);

  py::class_<Trajectory>(mod, "Trajectory")
      .def_readonly("times", &Trajectory::times)
      .def_readonly("macro", &Trajectory::macro)
      .def_readonly("records", &Trajectory::records)
      .def_readonly("min_ball", &Trajectory::min_ball)
      .def_readonly("snapshot_times", &Trajectory::snapshot_times)
      .def_readonly("snapshots", &Trajectory::snapshots)
      .def_readonly("clipped_total", &Trajectory::clipped_total)
      .def_readonly("mass_drift", &Trajectory::mass_drift)
      .def_readonly("energy_drift", &Trajectory::energy_drift)
      .def_readonly("raw_mass_drift", &Trajectory::raw_mass_drift)
      .def_readonly("raw_energy_drift", &Trajectory::raw_energy_drift)
      .def_readonly("dt_ceiling_min", &Trajectory::dt_ceiling_min)
      .def_readonly("completed", &Trajectory::completed)
      .def_readonly("detail", &Trajectory::detail);
  mod.def("run", &run, py::arg("xs"), py::arg("f0"), py::arg("config"),
          py::call_guard<py::gil_scoped_release>());
  mod.def("run_linear", &run_linear, py::arg("xs"), py::arg("g0"), py::arg("f_frozen"),
          py::arg("h_source"), py::arg("config"),
          py::call_guard<py::gil_scoped_release>());

  py::class_<KernelBoundsReport>(mod, "KernelBoundsReport")
      .def_readonly("annulus_r", &KernelBoundsReport::annulus_r)
      .def_readonly("annulus_scaled", &KernelBoundsReport::annulus_scaled)
      .def_readonly("Lambda", &KernelBoundsReport::Lambda)
      .def_readonly("ceiling", &KernelBoundsReport::ceiling)
      .def_readonly("ratio", &KernelBoundsReport::ratio)
      .def_readonly("cone_measure", &KernelBoundsReport::cone_measure)
      .def_readonly("guaranteed_measure", &KernelBoundsReport::guaranteed_measure)
      .def_readonly("lambda_floor", &KernelBoundsReport::lambda)
      .def_readonly("band", &KernelBoundsReport::band)
      .def_readonly("cone_ok", &KernelBoundsReport::cone_ok);
  mod.def(
      "kernel_upper_bound",
      [](const CrossSection& xs, const DistributionFunction& f,
         const std::vector<double>& v, const std::vector<double>& annuli,
         const QuadParams& qp) { return kernel_upper_bound(xs, f, to_vec(v), annuli, qp); },
      py::arg("xs"), py::arg("f"), py::arg("v"), py::arg("annuli"), py::arg("quad"));

  py::class_<LiftedSet>(mod, "LiftedSet")
      .def_readonly("r", &LiftedSet::r)
      .def_readonly("level", &LiftedSet::level)
      .def_readonly("mass_lb", &LiftedSet::mass_lb)
      .def_readonly("measured", &LiftedSet::measured)
      .def_readonly("moments_ok", &LiftedSet::moments_ok)
      .def_readonly("pass_", &LiftedSet::pass)
      .def_readonly("detail", &LiftedSet::detail);
  mod.def("lifted_set", &lifted_set, py::arg("f"), py::arg("M0"), py::arg("M1"),
          py::arg("E0"), py::arg("Htilde0"));
  mod.def(
      "cone_lower_bound",
      [](const CrossSection& xs, const DistributionFunction& f, const LiftedSet& ls,
         const std::vector<double>& v, int n) {
        return cone_lower_bound(xs, f, ls, to_vec(v), n);
      },
      py::arg("xs"), py::arg("f"), py::arg("lifted"), py::arg("v"),
      py::arg("n_samples") = 256);

  py::class_<CoercivityReport>(mod, "CoercivityReport")
      .def_readonly("lhs", &CoercivityReport::lhs)
      .def_readonly("rhs", &CoercivityReport::rhs)
      .def_readonly("ratio", &CoercivityReport::ratio)
      .def_readonly("pass_", &CoercivityReport::pass);
  mod.def(
      "cone_coercivity",
      [](const DistributionFunction& f, const std::vector<double>& v,
         const std::vector<double>& axis, double cos_min, double p, double nu) {
        return cone_coercivity(f, to_vec(v), Cone{to_vec(axis), cos_min}, p, nu);
      },
      py::arg("f"), py::arg("v"), py::arg("axis") = std::vector<double>{1, 0, 0},
      py::arg("cos_min") = -1.0, py::arg("p") = 2.0, py::arg("nu") = 1.0);
  mod.def("max_principle_report", &max_principle_report, py::arg("xs"), py::arg("f"),
          py::arg("quad"), py::arg("t") = 0.0);

  py::class_<ConfigResult>(mod, "ConfigResult")
      .def_readonly("ok", &ConfigResult::ok)
      .def_readonly("errors", &ConfigResult::errors);
  mod.def("load_config", &load_config);
}
