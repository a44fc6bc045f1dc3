#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "spinest/rotmath.hpp"

namespace spinest::physics {

using Vec3 = Eigen::Vector3d;

/// Ball and air constants. Derived coefficients are computed on demand so
/// they can never drift from the primaries.
struct PhysicalConstants {
  double mass = 0.0027;        // kg
  double radius = 0.02;        // m
  double gravity = 9.81;       // m/s^2
  double drag_coeff = 0.4;     // C_D
  double lift_coeff = 0.6;     // C_M
  double air_density = 1.29;   // kg/m^3

  /// Cross-section r^2 pi.
  double area() const;
  /// Drag coefficient 0.5 C_D rho A / m, stored positive (1/m).
  double k_drag() const;
  /// Magnus coefficient 0.5 C_M rho A r / m (unitless).
  double k_magnus() const;

  /// Throws Error(kInvalidArgument) unless every field is finite and > 0.
  void validate() const;
};

/// Ball state in the table frame: origin at the centre of the table surface,
/// x along the table towards the robot, y across, z up.
struct BallState {
  double t = 0.0;
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
};

/// Angular velocity in rad/s, right-hand rule, constant over a flight segment.
struct SpinVector {
  static constexpr double kMaxMagnitude = 1400.0;

  Vec3 omega = Vec3::Zero();

  static SpinVector zero() { return {}; }
  double magnitude() const { return omega.norm(); }
};

struct BallObservation {
  double t = 0.0;
  Vec3 position = Vec3::Zero();
};

/// Ordered ball observations with strictly increasing timestamps.
class Trajectory {
 public:
  /// Throws Error(kInvalidArgument) for fewer than 2 samples or
  /// non-increasing timestamps.
  explicit Trajectory(std::vector<BallObservation> samples);

  std::size_t size() const { return samples_.size(); }
  const BallObservation& operator[](std::size_t i) const { return samples_[i]; }
  const BallObservation& front() const { return samples_.front(); }
  const BallObservation& back() const { return samples_.back(); }
  auto begin() const { return samples_.begin(); }
  auto end() const { return samples_.end(); }
  std::span<const BallObservation> samples() const { return samples_; }

  /// Samples [first, last) as a new trajectory.
  Trajectory slice(std::size_t first, std::size_t last) const;

 private:
  std::vector<BallObservation> samples_;
};

/// Logo centre as seen by the camera: a unit direction in the camera-aligned
/// ball frame (z towards the camera), or all-zero when not visible.
struct LogoObservation {
  double t = 0.0;
  Vec3 direction = Vec3::Zero();
  bool visible = false;
};

/// Ball acceleration under drag, Magnus force and gravity:
///   -k_D |v| v + k_M (omega x v) - (0, 0, g).
Vec3 acceleration(const Vec3& velocity, const SpinVector& spin,
                  const PhysicalConstants& c);

inline Vec3 acceleration(const BallState& state, const SpinVector& spin,
                         const PhysicalConstants& c) {
  return acceleration(state.velocity, spin, c);
}

/// One classical Runge-Kutta step of length h.
BallState rk4_step(const BallState& s, const SpinVector& spin,
                   const PhysicalConstants& c, double h);

/// Fixed-step RK4 from `initial` to `t_end`, returning the state at every
/// multiple of dt plus `t_end` itself (the final step is shortened when
/// t_end is not on the grid). Requires dt in (0, 0.01] and t_end > initial.t.
std::vector<BallState> integrate(const BallState& initial, const SpinVector& spin,
                                 const PhysicalConstants& c, double dt,
                                 double t_end);

struct BouncePoint {
  Vec3 position = Vec3::Zero();
  double t = 0.0;
};

struct BounceConfig {
  double dt = 1e-3;      // integration step (s)
  double horizon = 3.0;  // give up after this much flight time (s)
};

/// First time the ball centre descends through z = r (ball touching the
/// table), refined by bisection inside the bracketing RK4 step to well below
/// 1e-6 s. Returns nullopt when no such crossing occurs within the horizon.
std::optional<BouncePoint> bounce_point(const BallState& initial,
                                        const SpinVector& spin,
                                        const PhysicalConstants& c,
                                        const BounceConfig& cfg = {});

struct ObservationConfig {
  double rate = 380.0;        // Hz, in [50, 500]
  double noise_sigma = 0.0;   // m, per-axis Gaussian
  std::uint64_t seed = 0;
  /// Flight time to sample. When unset, sampling stops strictly before the
  /// first bounce.
  std::optional<double> duration;
  double integration_dt = 1e-3;  // upper bound on the internal RK4 step
};

/// Samples the simulated flight at 1 / rate with i.i.d. Gaussian noise.
/// Reproducible per seed.
Trajectory simulate_observations(const BallState& initial, const SpinVector& spin,
                                 const PhysicalConstants& c,
                                 const ObservationConfig& cfg);

struct LogoSimConfig {
  double rate = 380.0;  // Hz, in [50, 500]
  double t_end = 0.1;   // s, frames at k / rate for k / rate <= t_end
  double miss_prob = 0.0;
  std::uint64_t seed = 0;
  /// Visible iff the logo direction's z component exceeds this
  /// (0.17 is roughly 80 degrees from the camera axis).
  double visibility_threshold = 0.17;
};

/// Logo track of a ball rotating at constant spin: orientation at frame time t
/// is exp(omega t) * initial, and the logo direction is that orientation
/// applied to (0, 0, 1).
std::vector<LogoObservation> simulate_logo(const rotmath::Quat& initial_orientation,
                                           const SpinVector& spin,
                                           const LogoSimConfig& cfg);

}  // namespace spinest::physics
