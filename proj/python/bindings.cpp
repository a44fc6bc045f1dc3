#include <map>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spinest/error.hpp"
#include "spinest/eval.hpp"
#include "spinest/logo_spin.hpp"
#include "spinest/magnus_fit.hpp"
#include "spinest/physics.hpp"
#include "spinest/rotmath.hpp"

namespace py = pybind11;
using namespace spinest;
using Vec3 = Eigen::Vector3d;
using Rows = py::array_t<double, py::array::c_style | py::array::forcecast>;

namespace {

physics::Trajectory to_trajectory(const Rows& a) {
  if (a.ndim() != 2 || a.shape(1) != 4) {
    throw Error(ErrorKind::kInvalidArgument, "trajectory array must have shape (n, 4): t, x, y, z");
  }
  const auto r = a.unchecked<2>();
  std::vector<physics::BallObservation> obs(static_cast<std::size_t>(a.shape(0)));
  for (py::ssize_t i = 0; i < a.shape(0); ++i) {
    obs[i].t = r(i, 0);
    obs[i].position = {r(i, 1), r(i, 2), r(i, 3)};
  }
  return physics::Trajectory(std::move(obs));
}

Rows from_trajectory(const physics::Trajectory& traj) {
  Rows out({static_cast<py::ssize_t>(traj.size()), py::ssize_t{4}});
  auto w = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto k = static_cast<py::ssize_t>(i);
    w(k, 0) = traj[i].t;
    for (int a = 0; a < 3; ++a) w(k, a + 1) = traj[i].position[a];
  }
  return out;
}

std::vector<physics::LogoObservation> to_logo(const Rows& a) {
  if (a.ndim() != 2 || a.shape(1) != 5) {
    throw Error(ErrorKind::kInvalidArgument,
                "logo array must have shape (n, 5): t, visible, lx, ly, lz");
  }
  const auto r = a.unchecked<2>();
  std::vector<physics::LogoObservation> obs(static_cast<std::size_t>(a.shape(0)));
  for (py::ssize_t i = 0; i < a.shape(0); ++i) {
    obs[i].t = r(i, 0);
    obs[i].visible = r(i, 1) != 0.0;
    if (obs[i].visible) obs[i].direction = Vec3(r(i, 2), r(i, 3), r(i, 4)).normalized();
  }
  return obs;
}

Rows from_logo(const std::vector<physics::LogoObservation>& obs) {
  Rows out({static_cast<py::ssize_t>(obs.size()), py::ssize_t{5}});
  auto w = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const auto k = static_cast<py::ssize_t>(i);
    w(k, 0) = obs[i].t;
    w(k, 1) = obs[i].visible ? 1.0 : 0.0;
    for (int a = 0; a < 3; ++a) w(k, a + 2) = obs[i].visible ? obs[i].direction[a] : 0.0;
  }
  return out;
}

py::dict estimate_dict(const magnus::SpinEstimate& est) {
  py::dict d;
  d["omega"] = Vec3(est.omega.omega);
  d["rms_residual"] = est.rms_residual;
  d["condition_number"] = est.condition_number;
  d["n_points"] = est.n_points;
  d["method"] = std::string(magnus::to_string(est.method));
  d["low_confidence"] = est.low_confidence;
  return d;
}

py::object bounce_dict(const std::optional<physics::BouncePoint>& b) {
  if (!b) return py::none();
  py::dict d;
  d["position"] = Vec3(b->position);
  d["t"] = b->t;
  return d;
}

physics::BallState state(const Vec3& position, const Vec3& velocity) {
  physics::BallState s;
  s.position = position;
  s.velocity = velocity;
  return s;
}

}  // namespace

PYBIND11_MODULE(_spinest, m) {
  m.doc() = "Spin estimation for table tennis balls (C++ core)";

  static py::exception<Error> error(m, "SpinestError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetObject(error.ptr(),
                      py::make_tuple(std::string(to_string(e.kind())), e.what()).ptr());
    }
  });

  py::class_<physics::PhysicalConstants>(m, "PhysicalConstants")
      .def(py::init<>())
      .def_readwrite("mass", &physics::PhysicalConstants::mass)
      .def_readwrite("radius", &physics::PhysicalConstants::radius)
      .def_readwrite("gravity", &physics::PhysicalConstants::gravity)
      .def_readwrite("drag_coeff", &physics::PhysicalConstants::drag_coeff)
      .def_readwrite("lift_coeff", &physics::PhysicalConstants::lift_coeff)
      .def_readwrite("air_density", &physics::PhysicalConstants::air_density)
      .def("k_drag", &physics::PhysicalConstants::k_drag)
      .def("k_magnus", &physics::PhysicalConstants::k_magnus);

  m.def(
      "simulate_trajectory",
      [](const Vec3& omega, const Vec3& position, const Vec3& velocity, double rate, double noise,
         std::uint64_t seed, std::optional<double> duration,
         const physics::PhysicalConstants& c) {
        physics::ObservationConfig cfg;
        cfg.rate = rate;
        cfg.noise_sigma = noise;
        cfg.seed = seed;
        cfg.duration = duration;
        return from_trajectory(
            physics::simulate_observations(state(position, velocity), {omega}, c, cfg));
      },
      py::arg("omega"), py::arg("position"), py::arg("velocity"), py::arg("rate") = 380.0,
      py::arg("noise") = 0.0, py::arg("seed") = 0, py::arg("duration") = py::none(),
      py::arg("constants") = physics::PhysicalConstants{},
      "Noisy observations (n, 4) of a simulated flight, until the bounce unless a duration is "
      "given.");

  m.def(
      "bounce_point",
      [](const Vec3& omega, const Vec3& position, const Vec3& velocity,
         const physics::PhysicalConstants& c) {
        return bounce_dict(physics::bounce_point(state(position, velocity), {omega}, c));
      },
      py::arg("omega"), py::arg("position"), py::arg("velocity"),
      py::arg("constants") = physics::PhysicalConstants{});

  m.def(
      "estimate_spin",
      [](const Rows& traj, const physics::PhysicalConstants& c, std::size_t window,
         std::size_t min_points, bool filter) {
        magnus::FitConfig cfg;
        cfg.window = window;
        cfg.min_points = min_points;
        cfg.filter = filter;
        return estimate_dict(magnus::estimate_spin(to_trajectory(traj), c, cfg));
      },
      py::arg("trajectory"), py::arg("constants") = physics::PhysicalConstants{},
      py::arg("window") = magnus::kWholeSegment, py::arg("min_points") = 10,
      py::arg("filter") = true, "Spin from a trajectory array (n, 4); window 0 uses all rows.");

  m.def(
      "predict_bounce",
      [](const Rows& prefix, std::optional<Vec3> omega, const physics::PhysicalConstants& c) {
        std::optional<physics::SpinVector> spin;
        if (omega) spin = physics::SpinVector{*omega};
        return bounce_dict(magnus::predict_bounce(to_trajectory(prefix), spin, c));
      },
      py::arg("prefix"), py::arg("omega") = py::none(),
      py::arg("constants") = physics::PhysicalConstants{});

  m.def(
      "simulate_logo",
      [](const Vec3& omega, const Eigen::Vector4d& orientation, double rate, double t_end,
         double miss_prob, std::uint64_t seed) {
        physics::LogoSimConfig cfg;
        cfg.rate = rate;
        cfg.t_end = t_end;
        cfg.miss_prob = miss_prob;
        cfg.seed = seed;
        const rotmath::Quat q(orientation[0], orientation[1], orientation[2], orientation[3]);
        return from_logo(physics::simulate_logo(q, {omega}, cfg));
      },
      py::arg("omega"), py::arg("orientation") = Eigen::Vector4d(1.0, 0.0, 0.0, 0.0),
      py::arg("rate") = 380.0, py::arg("t_end") = 0.1, py::arg("miss_prob") = 0.0,
      py::arg("seed") = 0, "Logo track (n, 5): t, visible, lx, ly, lz.");

  m.def(
      "estimate_spin_logo",
      [](const Rows& track, std::size_t half_revolution_gap, const std::string& gap_rule) {
        logo::LogoConfig cfg;
        cfg.angular.half_revolution_gap = half_revolution_gap;
        if (gap_rule == "always_long") {
          cfg.angular.gap_rule = logo::GapRule::kAlwaysLong;
        } else if (gap_rule != "predicted") {
          throw Error(ErrorKind::kInvalidArgument, "gap_rule must be 'predicted' or 'always_long'");
        }
        const auto obs = to_logo(track);
        return estimate_dict(
            logo::estimate_spin_logo(std::span<const physics::LogoObservation>(obs), cfg));
      },
      py::arg("track"), py::arg("half_revolution_gap") = 2, py::arg("gap_rule") = "predicted");

  m.def("segment_area", &logo::segment_area, py::arg("alpha"), py::arg("r"));
  m.def("segment_centroid_offset", &logo::segment_centroid_offset, py::arg("alpha"), py::arg("r"));
  m.def("segment_half_angle", &logo::segment_half_angle, py::arg("area"), py::arg("r"));

  m.def(
      "geodesic_quat",
      [](const Eigen::Vector4d& a, const Eigen::Vector4d& b) {
        return rotmath::geodesic(rotmath::Quat(a[0], a[1], a[2], a[3]),
                                 rotmath::Quat(b[0], b[1], b[2], b[3]));
      },
      py::arg("q1"), py::arg("q2"), "Rotation angle between two quaternions (w, x, y, z).");
  m.def(
      "geodesic_matrix",
      [](const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
        return rotmath::geodesic(rotmath::RotMatrix(a), rotmath::RotMatrix(b));
      },
      py::arg("r1"), py::arg("r2"));

  m.def("bat_pitch", &eval::bat_pitch, py::arg("beta_spin_deg_s"));

  m.def("make_settings", [] {
    py::list out;
    for (const eval::SpinSetting& s : eval::make_settings()) {
      py::dict d;
      d["name"] = s.name;
      d["omega"] = Vec3(s.omega.omega);
      d["position"] = Vec3(s.launch.position);
      d["velocity"] = Vec3(s.launch.velocity);
      out.append(d);
    }
    return out;
  });

  m.def(
      "cluster_classify",
      [](const std::map<std::string, Eigen::MatrixX3d>& groups) {
        std::vector<eval::LabeledEstimates> in;
        for (const auto& [name, rows] : groups) {
          eval::LabeledEstimates g{name, {}};
          for (Eigen::Index i = 0; i < rows.rows(); ++i) g.omegas.push_back(rows.row(i).transpose());
          in.push_back(std::move(g));
        }
        const eval::ClusterReport rep = eval::cluster_classify(in);
        py::dict d;
        for (std::size_t k = 0; k < rep.settings.size(); ++k) {
          py::dict row;
          row["accuracy"] = rep.accuracy[k];
          row["center"] = Vec3(rep.centers[k]);
          row["correct"] = rep.correct[k];
          row["count"] = rep.counts[k];
          d[py::str(rep.settings[k])] = row;
        }
        py::dict out;
        out["settings"] = d;
        out["total_accuracy"] = rep.total_accuracy;
        out["degenerate"] = rep.degenerate;
        return out;
      },
      py::arg("groups"), "Nearest-median classification of {setting: (n, 3) spin array}.");

  m.def(
      "bounce_benchmark",
      [](std::size_t n_per_setting, double noise, double rate, std::uint64_t seed,
         std::size_t jobs) {
        eval::BenchmarkConfig cfg;
        cfg.n_per_setting = n_per_setting;
        cfg.noise_sigma = noise;
        cfg.rate = rate;
        cfg.seed = seed;
        cfg.jobs = jobs;
        eval::BenchmarkResult res;
        {
          py::gil_scoped_release release;
          res = eval::bounce_benchmark(eval::make_settings(), cfg);
        }
        py::list rows;
        for (const eval::BounceRow& r : res.rows) {
          py::dict d;
          d["setting"] = r.setting;
          d["fitted_mean_mm"] = r.fitted_mean_mm;
          d["fitted_std_mm"] = r.fitted_std_mm;
          d["nospin_mean_mm"] = r.nospin_mean_mm;
          d["nospin_std_mm"] = r.nospin_std_mm;
          d["used"] = r.used;
          d["excluded"] = r.excluded;
          rows.append(d);
        }
        return rows;
      },
      py::arg("n_per_setting") = 50, py::arg("noise") = 0.002, py::arg("rate") = 380.0,
      py::arg("seed") = 1, py::arg("jobs") = 1,
      "Bounce-prediction error table over the 9 synthetic settings.");
}
