#include "spinest/magnus_fit.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "spinest/error.hpp"

namespace spinest::magnus {

namespace {

constexpr std::size_t kMinFitPoints = 5;

// Cubic fit through an arbitrary set of samples.
PolyFit3 fit_samples(std::span<const physics::BallObservation> pts) {
  const std::size_t n = pts.size();
  if (n < kMinFitPoints) {
    throw Error(ErrorKind::kInsufficientData,
                "cubic fit needs at least 5 samples, got " + std::to_string(n));
  }
  PolyFit3 fit;
  fit.t_start = pts.front().t;
  fit.t_end = pts.back().t;
  fit.t0 = 0.5 * (fit.t_start + fit.t_end);
  fit.n_points = n;
  const double half = 0.5 * (fit.t_end - fit.t_start);
  if (!(half > 0.0)) {
    throw Error(ErrorKind::kRankDeficient, "fit window has zero duration");
  }

  // Vandermonde in s = tau / half, so every column is O(1).
  Eigen::MatrixXd design(n, 4);
  Eigen::MatrixXd rhs(n, 3);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = (pts[i].t - fit.t0) / half;
    const auto row = static_cast<Eigen::Index>(i);
    design(row, 0) = 1.0;
    design(row, 1) = s;
    design(row, 2) = s * s;
    design(row, 3) = s * s * s;
    rhs.row(row) = pts[i].position.transpose();
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-12);
  if (qr.rank() < 4) {
    throw Error(ErrorKind::kRankDeficient, "cubic design matrix is rank deficient");
  }
  const Eigen::MatrixXd scaled = qr.solve(rhs);
  double scale = 1.0;
  for (int k = 0; k < 4; ++k) {
    fit.coeffs.row(k) = scaled.row(k) / scale;
    scale *= half;
  }
  const Eigen::MatrixXd resid = design * scaled - rhs;
  fit.rms_residual = std::sqrt(resid.squaredNorm() / static_cast<double>(n));
  return fit;
}

std::size_t effective_window(std::size_t window, std::size_t n) {
  if (window == kWholeSegment) return n;
  return std::clamp<std::size_t>(window, kMinFitPoints, n);
}

Eigen::Matrix3d skew(const Vec3& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

}  // namespace

Vec3 PolyFit3::position(double t) const {
  const double u = t - t0;
  return (coeffs.row(0) + u * (coeffs.row(1) + u * (coeffs.row(2) + u * coeffs.row(3))))
      .transpose();
}

Vec3 PolyFit3::velocity(double t) const {
  const double u = t - t0;
  return (coeffs.row(1) + u * (2.0 * coeffs.row(2) + 3.0 * u * coeffs.row(3))).transpose();
}

Vec3 PolyFit3::acceleration(double t) const {
  const double u = t - t0;
  return (2.0 * coeffs.row(2) + 6.0 * u * coeffs.row(3)).transpose();
}

PolyFit3 fit_polynomial(const Trajectory& traj, std::size_t first, std::size_t last) {
  if (first >= last || last > traj.size()) {
    throw Error(ErrorKind::kInvalidArgument, "invalid fit window");
  }
  return fit_samples(traj.samples().subspan(first, last - first));
}

SpinEstimate solve_spin(const PolyFit3& fit, std::span<const double> times,
                        const PhysicalConstants& c) {
  c.validate();
  const std::size_t n = times.size();
  if (n < 3) {
    throw Error(ErrorKind::kInsufficientData, "spin fit needs at least 3 sample times");
  }

  std::vector<Vec3> vel(n);
  for (std::size_t i = 0; i < n; ++i) vel[i] = fit.velocity(times[i]);

  double spread = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      spread = std::max(spread, std::atan2(vel[i].cross(vel[j]).norm(), vel[i].dot(vel[j])));
    }
  }
  if (!(spread > 0.1 * std::numbers::pi / 180.0)) {
    throw Error(ErrorKind::kDegenerateGeometry,
                "velocity direction is nearly constant; spin along the flight "
                "direction is unobservable");
  }

  const double k_m = c.k_magnus();
  const double k_d = c.k_drag();
  const Vec3 gravity(0.0, 0.0, c.gravity);
  Eigen::MatrixXd m(3 * n, 3);
  Eigen::VectorXd a(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& v = vel[i];
    const auto r = static_cast<Eigen::Index>(3 * i);
    m.block<3, 3>(r, 0) = -k_m * skew(v);
    a.segment<3>(r) = fit.acceleration(times[i]) + k_d * v.norm() * v + gravity;
  }

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  const double cond = sv(2) > 0.0 ? sv(0) / sv(2) : std::numeric_limits<double>::infinity();
  if (!(cond <= kMaxConditionNumber)) {
    throw Error(ErrorKind::kDegenerateGeometry,
                "Magnus system is ill-conditioned (condition number " +
                    std::to_string(cond) + ")");
  }

  const Vec3 omega = m.householderQr().solve(a);
  SpinEstimate est;
  est.omega.omega = omega;
  est.rms_residual = std::sqrt((m * omega - a).squaredNorm() / static_cast<double>(n));
  est.condition_number = cond;
  est.n_points = n;
  est.method = SpinMethod::kTrajectory;
  return est;
}

Trajectory filter_outliers(const Trajectory& traj, const OutlierConfig& cfg) {
  if (!(cfg.threshold > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "outlier threshold must be positive");
  }
  const std::size_t window = std::max(cfg.window, kMinFitPoints);
  const std::size_t n = traj.size();
  if (n < window) {
    throw Error(ErrorKind::kInsufficientData,
                "too few observations for outlier filtering");
  }
  const std::size_t head = n >= cfg.head_len + window ? cfg.head_len : n;

  std::vector<bool> keep(n, true);
  if (head > window) {
    // Indices of the accepted observations nearest (later in time) to the
    // current candidate, ascending.
    std::deque<std::size_t> local;
    for (std::size_t i = head - window; i < head; ++i) local.push_back(i);

    std::vector<physics::BallObservation> pts(window);
    for (std::size_t i = head - window; i-- > 0;) {
      for (std::size_t k = 0; k < window; ++k) pts[k] = traj[local[k]];
      const PolyFit3 fit = fit_samples(pts);
      const double miss = (fit.position(traj[i].t) - traj[i].position).norm();
      if (miss > cfg.threshold) {
        keep[i] = false;
      } else {
        local.push_front(i);
        local.pop_back();
      }
    }
  }

  std::vector<physics::BallObservation> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i]) out.push_back(traj[i]);
  }
  if (out.size() < window) {
    throw Error(ErrorKind::kInsufficientData,
                "fewer than 5 inliers remain after outlier filtering");
  }
  return Trajectory(std::move(out));
}

SpinEstimate estimate_spin(const Trajectory& traj, const PhysicalConstants& c,
                           const FitConfig& cfg) {
  const std::size_t min_points = std::max<std::size_t>(cfg.min_points, kMinFitPoints);
  if (traj.size() < min_points) {
    throw Error(ErrorKind::kInsufficientData,
                "spin estimation needs at least " + std::to_string(min_points) +
                    " observations, got " + std::to_string(traj.size()));
  }
  const Trajectory filtered = cfg.filter ? filter_outliers(traj, cfg.outliers) : traj;
  const std::size_t n = filtered.size();
  if (n < min_points) {
    throw Error(ErrorKind::kInsufficientData,
                "only " + std::to_string(n) + " observations left after outlier filtering");
  }
  const std::size_t w = effective_window(cfg.window, n);
  const std::size_t first = n - w;
  const PolyFit3 fit = fit_polynomial(filtered, first, n);
  std::vector<double> times;
  times.reserve(w);
  for (std::size_t i = first; i < n; ++i) times.push_back(filtered[i].t);
  SpinEstimate est = solve_spin(fit, times, c);
  if (!(est.omega.magnitude() <= SpinVector::kMaxMagnitude)) {
    throw Error(ErrorKind::kDegenerateGeometry,
                "estimated spin of " + std::to_string(est.omega.magnitude()) +
                    " rad/s exceeds the physical bound (flight too straight for the noise level)");
  }
  return est;
}

BallState endpoint_state(const Trajectory& prefix, std::size_t window) {
  const std::size_t n = prefix.size();
  const std::size_t w = effective_window(window, n);
  if (n < kMinFitPoints) {
    throw Error(ErrorKind::kInsufficientData, "prefix too short for a cubic fit");
  }
  const PolyFit3 fit = fit_polynomial(prefix, n - w, n);
  BallState s;
  s.t = prefix.back().t;
  s.position = fit.position(s.t);
  s.velocity = fit.velocity(s.t);
  return s;
}

std::optional<physics::BouncePoint> predict_bounce(
    const Trajectory& prefix, const std::optional<SpinVector>& spin,
    const PhysicalConstants& c, const PredictConfig& cfg) {
  const BallState start = endpoint_state(prefix, cfg.window);
  return physics::bounce_point(start, spin.value_or(SpinVector::zero()), c, cfg.bounce);
}

}  // namespace spinest::magnus
