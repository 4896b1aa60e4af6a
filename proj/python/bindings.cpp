// Python bindings for the core planning operations: kinematics queries,
// SDF construction, scenario solves and the benchmark runner.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gpmanip/benchmark.hpp"
#include "gpmanip/gradcheck.hpp"
#include "gpmanip/initialization.hpp"
#include "gpmanip/kinematics.hpp"
#include "gpmanip/scenario.hpp"

namespace py = pybind11;
using namespace gpmanip;

PYBIND11_MODULE(_gpmanip, m) {
  m.doc() = "GP trajectory planner with manipulability maximization";

  py::class_<ChainModel>(m, "ChainModel")
      .def_static("from_json_file", &ChainModel::from_json_file)
      .def_static("from_json_string", &ChainModel::from_json_string)
      .def_property_readonly("dof", &ChainModel::dof)
      .def_property_readonly("task_dim", &ChainModel::task_dim)
      .def_property_readonly("m_max", &ChainModel::m_max)
      .def("set_m_max", &ChainModel::set_m_max)
      .def("lower_limits", &ChainModel::lower_limits)
      .def("upper_limits", &ChainModel::upper_limits);

  py::class_<ManipReport>(m, "ManipReport")
      .def_readonly("m", &ManipReport::m)
      .def_readonly("singular_values", &ManipReport::singular_values)
      .def_readonly("smallest_sv", &ManipReport::smallest_sv);

  m.def("fk_position", [](const ChainModel& model, const Vec& q) {
    return Vec3(fk_position(model, q));
  });
  m.def("collision_sphere_centers", [](const ChainModel& model, const Vec& q) {
    const FkResult fk = forward_kinematics(model, q);
    const auto& spheres = model.collision_spheres();
    Mat out(static_cast<Eigen::Index>(spheres.size()), 4);
    for (size_t s = 0; s < spheres.size(); ++s) {
      const auto row = static_cast<Eigen::Index>(s);
      out.row(row).head(3) = sphere_center(model, fk, spheres[s]).transpose();
      out(row, 3) = spheres[s].radius;
    }
    return out;
  });
  m.def("jacobian", &jacobian);
  m.def("jacobian_partial", &jacobian_partial);
  m.def("manipulability", &manipulability);
  m.def("manipulability_gradient", &manipulability_gradient);
  m.def("estimate_m_max", &estimate_m_max, py::arg("model"),
        py::arg("samples"), py::arg("seed"));

  py::class_<GPParams>(m, "GPParams")
      .def_static("isotropic", &GPParams::isotropic, py::arg("n"),
                  py::arg("qc_scale"), py::arg("total_time"),
                  py::arg("num_support"));

  py::class_<GPTrajectory>(m, "GPTrajectory")
      .def_property_readonly("num_support", &GPTrajectory::num_support)
      .def("state", [](const GPTrajectory& t, int i) { return t.state(i); })
      .def("theta", &GPTrajectory::theta)
      .def("theta_dot", &GPTrajectory::theta_dot)
      .def("interpolate",
           [](const GPTrajectory& t, double tau) { return t.interpolate(tau).x; });

  m.def("make_constant_velocity_prior", &make_constant_velocity_prior);

  py::class_<SolveReport>(m, "SolveReport")
      .def_readonly("iterations", &SolveReport::iterations)
      .def_readonly("initial_cost", &SolveReport::initial_cost)
      .def_readonly("final_cost", &SolveReport::final_cost)
      .def_readonly("converged", &SolveReport::converged)
      .def_readonly("cost_trace", &SolveReport::cost_trace);

  py::class_<RunMetrics>(m, "RunMetrics")
      .def_readonly("manip_avg", &RunMetrics::manip_avg)
      .def_readonly("manip_min", &RunMetrics::manip_min)
      .def_readonly("manip_max", &RunMetrics::manip_max)
      .def_readonly("vel_max", &RunMetrics::vel_max)
      .def_readonly("vel_avg", &RunMetrics::vel_avg)
      .def_readonly("solved", &RunMetrics::solved)
      .def_readonly("iterations", &RunMetrics::iterations);

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def_static("from_json_file", &ScenarioConfig::from_json_file)
      .def_static("from_json_string", &ScenarioConfig::from_json_string,
                  py::arg("text"), py::arg("base_dir") = "");

  py::class_<PlanResult>(m, "PlanResult")
      .def_readonly("report", &PlanResult::report)
      .def_readonly("metrics", &PlanResult::metrics)
      .def_readonly("init_metrics", &PlanResult::init_metrics)
      .def_property_readonly(
          "solution", [](const PlanResult& r) { return r.solution; })
      .def_property_readonly(
          "initialization", [](const PlanResult& r) { return r.initialization; });

  m.def("run_plan",
        [](const ScenarioConfig& scenario) { return run_plan(scenario); });

  py::class_<BenchmarkRow>(m, "BenchmarkRow")
      .def_readonly("method", &BenchmarkRow::method)
      .def_readonly("manip_avg", &BenchmarkRow::manip_avg)
      .def_readonly("vel_max", &BenchmarkRow::vel_max)
      .def_readonly("solved", &BenchmarkRow::solved)
      .def_readonly("runs", &BenchmarkRow::runs);

  py::class_<BenchmarkResult>(m, "BenchmarkResult")
      .def_readonly("rows", &BenchmarkResult::rows)
      .def_readonly("k_sweep", &BenchmarkResult::k_sweep);

  m.def(
      "run_benchmark",
      [](const ScenarioConfig& scenario, int runs, int jobs) {
        BenchmarkOptions opts;
        opts.runs = runs;
        opts.jobs = jobs;
        return run_benchmark(scenario, opts);
      },
      py::arg("scenario"), py::arg("runs") = 50, py::arg("jobs") = 1);

  m.def("run_gradcheck",
        [](const ChainModel& model, int samples, uint64_t seed) {
          const GradCheckReport report = run_gradcheck(model, samples, seed);
          py::dict out;
          for (const auto& e : report.entries) {
            out[py::str(e.name)] = e.max_rel_error;
          }
          return out;
        });
}
