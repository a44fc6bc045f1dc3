#include "spinest/physics.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "spinest/error.hpp"

namespace spinest::physics {

namespace {

constexpr double kMaxSpeed = 60.0;

void check_state(const BallState& s) {
  if (!std::isfinite(s.t) || !s.position.allFinite() || !s.velocity.allFinite()) {
    throw Error(ErrorKind::kInvalidArgument, "ball state is not finite");
  }
  if (!(s.velocity.norm() < kMaxSpeed)) {
    throw Error(ErrorKind::kInvalidArgument, "ball speed exceeds 60 m/s");
  }
}

void check_spin(const SpinVector& spin) {
  if (!spin.omega.allFinite() || spin.magnitude() > SpinVector::kMaxMagnitude) {
    throw Error(ErrorKind::kInvalidArgument, "spin magnitude exceeds 1400 rad/s");
  }
}

void check_rate(double rate) {
  if (!(rate >= 50.0 && rate <= 500.0)) {
    throw Error(ErrorKind::kInvalidArgument, "camera rate must lie in [50, 500] Hz");
  }
}

}  // namespace

double PhysicalConstants::area() const { return radius * radius * std::numbers::pi; }

double PhysicalConstants::k_drag() const {
  return 0.5 * drag_coeff * air_density * area() / mass;
}

double PhysicalConstants::k_magnus() const {
  return 0.5 * lift_coeff * air_density * area() * radius / mass;
}

void PhysicalConstants::validate() const {
  for (double v : {mass, radius, gravity, drag_coeff, lift_coeff, air_density}) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorKind::kInvalidArgument,
                  "physical constants must be finite and strictly positive");
    }
  }
}

Trajectory::Trajectory(std::vector<BallObservation> samples)
    : samples_(std::move(samples)) {
  if (samples_.size() < 2) {
    throw Error(ErrorKind::kInvalidArgument, "trajectory needs at least 2 samples");
  }
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!std::isfinite(samples_[i].t) || !samples_[i].position.allFinite()) {
      throw Error(ErrorKind::kInvalidArgument,
                  "trajectory sample " + std::to_string(i) + " is not finite");
    }
    if (i > 0 && !(samples_[i].t > samples_[i - 1].t)) {
      throw Error(ErrorKind::kInvalidArgument,
                  "trajectory timestamps must be strictly increasing (sample " +
                      std::to_string(i) + ")");
    }
  }
}

Trajectory Trajectory::slice(std::size_t first, std::size_t last) const {
  if (first >= last || last > samples_.size()) {
    throw Error(ErrorKind::kInvalidArgument, "invalid trajectory slice");
  }
  return Trajectory({samples_.begin() + static_cast<std::ptrdiff_t>(first),
                     samples_.begin() + static_cast<std::ptrdiff_t>(last)});
}

Vec3 acceleration(const Vec3& v, const SpinVector& spin, const PhysicalConstants& c) {
  return -c.k_drag() * v.norm() * v + c.k_magnus() * spin.omega.cross(v) -
         Vec3(0.0, 0.0, c.gravity);
}

BallState rk4_step(const BallState& s, const SpinVector& spin,
                   const PhysicalConstants& c, double h) {
  const Vec3 k1v = acceleration(s.velocity, spin, c);
  const Vec3 k1x = s.velocity;
  const Vec3 k2v = acceleration(s.velocity + 0.5 * h * k1v, spin, c);
  const Vec3 k2x = s.velocity + 0.5 * h * k1v;
  const Vec3 k3v = acceleration(s.velocity + 0.5 * h * k2v, spin, c);
  const Vec3 k3x = s.velocity + 0.5 * h * k2v;
  const Vec3 k4v = acceleration(s.velocity + h * k3v, spin, c);
  const Vec3 k4x = s.velocity + h * k3v;

  BallState out;
  out.t = s.t + h;
  out.position = s.position + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
  out.velocity = s.velocity + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  return out;
}

std::vector<BallState> integrate(const BallState& initial, const SpinVector& spin,
                                 const PhysicalConstants& c, double dt,
                                 double t_end) {
  if (!(dt > 0.0 && dt <= 0.01)) {
    throw Error(ErrorKind::kInvalidArgument, "integration step must lie in (0, 0.01] s");
  }
  if (!(t_end > initial.t)) {
    throw Error(ErrorKind::kInvalidArgument, "t_end must be after the initial time");
  }
  check_state(initial);
  check_spin(spin);
  c.validate();

  const double span = t_end - initial.t;
  // Full steps that end strictly before t_end (with a relative slack so that
  // t_end on the grid is reached by a full step, not a sliver).
  const auto full = static_cast<std::size_t>(std::floor(span / dt * (1.0 + 1e-12)));

  std::vector<BallState> out;
  out.reserve(full + 2);
  out.push_back(initial);
  BallState s = initial;
  for (std::size_t k = 1; k <= full; ++k) {
    s = rk4_step(s, spin, c, dt);
    s.t = initial.t + static_cast<double>(k) * dt;
    out.push_back(s);
  }
  const double rest = t_end - s.t;
  if (rest > 1e-12 * std::max(1.0, std::abs(t_end))) {
    s = rk4_step(s, spin, c, rest);
    s.t = t_end;
    out.push_back(s);
  }
  return out;
}

std::optional<BouncePoint> bounce_point(const BallState& initial,
                                        const SpinVector& spin,
                                        const PhysicalConstants& c,
                                        const BounceConfig& cfg) {
  if (!(cfg.dt > 0.0 && cfg.dt <= 0.01) || !(cfg.horizon > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "invalid bounce search configuration");
  }
  check_state(initial);
  check_spin(spin);
  c.validate();

  const double contact = c.radius;
  const auto steps = static_cast<std::size_t>(std::ceil(cfg.horizon / cfg.dt));
  BallState s = initial;
  for (std::size_t k = 0; k < steps; ++k) {
    const BallState next = rk4_step(s, spin, c, cfg.dt);
    if (s.position.z() > contact && next.position.z() <= contact) {
      // z(h) is monotone here for any realistic step; bisect on the step length.
      double lo = 0.0, hi = cfg.dt;
      for (int it = 0; it < 60 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (rk4_step(s, spin, c, mid).position.z() > contact) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      const BallState at = rk4_step(s, spin, c, 0.5 * (lo + hi));
      return BouncePoint{at.position, s.t + 0.5 * (lo + hi)};
    }
    s = next;
    if (!s.position.allFinite()) break;
  }
  return std::nullopt;
}

Trajectory simulate_observations(const BallState& initial, const SpinVector& spin,
                                 const PhysicalConstants& c,
                                 const ObservationConfig& cfg) {
  check_rate(cfg.rate);
  if (!(cfg.noise_sigma >= 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "noise sigma must be non-negative");
  }
  const double period = 1.0 / cfg.rate;
  const auto substeps =
      static_cast<std::size_t>(std::ceil(period / cfg.integration_dt - 1e-9));
  const double h = period / static_cast<double>(substeps);

  double last_time = 0.0;
  if (cfg.duration) {
    if (!(*cfg.duration > 0.0)) {
      throw Error(ErrorKind::kInvalidArgument, "duration must be positive");
    }
    last_time = initial.t + *cfg.duration;
  } else {
    const auto bounce = bounce_point(initial, spin, c);
    if (!bounce) throw Error(ErrorKind::kNoBounce, "simulated flight never bounces");
    last_time = bounce->t;
  }

  // Sample k lies at initial.t + k * period; without a duration only samples
  // strictly before the bounce are kept.
  const double n_periods = (last_time - initial.t) * cfg.rate;
  auto count = static_cast<std::size_t>(std::floor(n_periods + 1e-9)) + 1;
  if (!cfg.duration) {
    while (count > 0 &&
           initial.t + static_cast<double>(count - 1) * period >= last_time) {
      --count;
    }
  }
  if (count < 2) {
    throw Error(ErrorKind::kInsufficientData, "flight too short for two observations");
  }

  const double t_final = initial.t + static_cast<double>((count - 1) * substeps) * h;
  const std::vector<BallState> path = integrate(initial, spin, c, h, t_final);

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<BallObservation> obs;
  obs.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const BallState& s = path[std::min(k * substeps, path.size() - 1)];
    Vec3 p = s.position;
    if (cfg.noise_sigma > 0.0) {
      for (int a = 0; a < 3; ++a) p[a] += cfg.noise_sigma * noise(rng);
    }
    obs.push_back({s.t, p});
  }
  return Trajectory(std::move(obs));
}

std::vector<LogoObservation> simulate_logo(const rotmath::Quat& initial_orientation,
                                           const SpinVector& spin,
                                           const LogoSimConfig& cfg) {
  check_rate(cfg.rate);
  check_spin(spin);
  if (!(cfg.miss_prob >= 0.0 && cfg.miss_prob < 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "miss probability must lie in [0, 1)");
  }
  if (!(cfg.t_end >= 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "t_end must be non-negative");
  }

  std::mt19937_64 rng(cfg.seed);
  std::bernoulli_distribution missed(cfg.miss_prob);
  const auto frames = static_cast<std::size_t>(std::floor(cfg.t_end * cfg.rate + 1e-9)) + 1;
  std::vector<LogoObservation> out;
  out.reserve(frames);
  for (std::size_t k = 0; k < frames; ++k) {
    const double t = static_cast<double>(k) / cfg.rate;
    const rotmath::Quat q = rotmath::exp_map(spin.omega * t) * initial_orientation;
    const Vec3 dir = rotmath::logo_direction(q);
    const bool dropped = missed(rng);
    LogoObservation o;
    o.t = t;
    o.visible = dir.z() > cfg.visibility_threshold && !dropped;
    if (o.visible) o.direction = dir;
    out.push_back(o);
  }
  return out;
}

}  // namespace spinest::physics
