#include "spinest/logo_spin.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "spinest/error.hpp"

namespace spinest::logo {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

Vec3 any_perpendicular(const Vec3& n) {
  const Vec3 seed = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  return (seed - seed.dot(n) * n).normalized();
}

Vec3 rotate_about(const Vec3& v, const Vec3& axis, double angle) {
  return v * std::cos(angle) + axis.cross(v) * std::sin(angle) +
         axis * axis.dot(v) * (1.0 - std::cos(angle));
}

}  // namespace

std::vector<Vec3> project_contour(std::span<const ContourPixel> pixels, double radius_px) {
  if (pixels.empty()) throw Error(ErrorKind::kEmptyContour, "contour is empty");
  if (!(radius_px > 0.0) || !std::isfinite(radius_px)) {
    throw Error(ErrorKind::kInvalidArgument, "ball radius in pixels must be positive");
  }
  std::vector<Vec3> out;
  out.reserve(pixels.size());
  for (const ContourPixel& px : pixels) {
    double x = px.u / radius_px;
    double y = px.v / radius_px;
    const double rho = std::hypot(px.u, px.v);
    if (rho > radius_px + 1.0) {
      throw Error(ErrorKind::kInvalidArgument, "contour pixel lies outside the ball");
    }
    if (rho > radius_px) {
      x = px.u / rho;
      y = px.v / rho;
    }
    const double z = std::sqrt(std::max(0.0, 1.0 - x * x - y * y));
    out.push_back(Vec3(x, y, z).normalized());
  }
  return out;
}

Vec3 contour_centroid(std::span<const Vec3> points) {
  if (points.size() < 3) {
    throw Error(ErrorKind::kDegenerateCentroid, "centroid needs at least 3 contour points");
  }
  Vec3 sum = Vec3::Zero();
  for (const Vec3& p : points) sum += p;
  const Vec3 mean = sum / static_cast<double>(points.size());
  if (!(mean.norm() > 1e-6)) {
    throw Error(ErrorKind::kDegenerateCentroid, "contour points average to the origin");
  }
  return mean.normalized();
}

SegmentClass classify_segment(std::span<const Vec3> points, double limb_polar_deg) {
  const double z_limit = std::cos(limb_polar_deg * kDeg);
  for (const Vec3& p : points) {
    if (p.z() < z_limit) return SegmentClass::kPartial;
  }
  return SegmentClass::kFull;
}

double segment_area(double alpha, double r) {
  return 0.5 * r * r * (2.0 * alpha - std::sin(2.0 * alpha));
}

double segment_centroid_offset(double alpha, double r) {
  if (alpha >= kPi) return 0.0;  // whole disc; sin(pi) is not exactly zero
  const double s = std::sin(alpha);
  return 4.0 * r * s * s * s / (3.0 * (2.0 * alpha - std::sin(2.0 * alpha)));
}

double segment_half_angle(double area, double r) {
  if (!(area > 0.0) || area > kPi * r * r * (1.0 + 1e-12)) {
    throw Error(ErrorKind::kInvalidArgument, "segment area outside (0, pi r^2]");
  }
  // 2a - sin 2a is strictly increasing on (0, pi).
  double lo = 0.0, hi = kPi;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (segment_area(mid, r) < area) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

SegmentCorrection segment_correct(std::span<const Vec3> points, const Vec3& centroid,
                                  const SegmentGeometry& g, SegmentClass cls) {
  if (!(g.logo_radius > 0.0) || !(g.logo_radius < g.ball_radius)) {
    throw Error(ErrorKind::kInvalidArgument, "logo radius must be below the ball radius");
  }
  SegmentCorrection out;
  out.center = centroid;
  if (cls == SegmentClass::kFull || points.empty()) return out;

  double mean_dist = 0.0;
  for (const Vec3& p : points) mean_dist += (p - p.dot(centroid) * centroid).norm();
  mean_dist = mean_dist / static_cast<double>(points.size()) * g.ball_radius;
  const double area = kPi * mean_dist * mean_dist;
  const double r = g.logo_radius;
  if (!(area > 0.0) || area > kPi * r * r) {
    out.fallback = true;
    return out;
  }

  // Direction from the centroid towards the part of the contour on the limb.
  const double z_limit = std::cos(g.limb_polar_deg * kDeg);
  Vec3 limb = Vec3::Zero();
  for (const Vec3& p : points) {
    if (p.z() < z_limit) limb += p;
  }
  if (limb.norm() < 1e-12) limb = Vec3(centroid.x(), centroid.y(), 0.0);
  const Vec3 axis = centroid.cross(limb - centroid);
  if (axis.norm() < 1e-12) {
    out.fallback = true;
    return out;
  }

  out.half_angle = segment_half_angle(area, r);
  out.offset = segment_centroid_offset(out.half_angle, r);
  out.center = rotate_about(centroid, axis.normalized(), out.offset / g.ball_radius).normalized();
  out.corrected = true;
  return out;
}

double RotationPlane::circle_radius() const {
  return std::sqrt(std::max(0.0, 1.0 - offset * offset));
}

namespace {

Eigen::VectorXd plane_residuals(std::span<const Vec3> pts, const Vec3& n, double d,
                                double weight) {
  const auto m = static_cast<Eigen::Index>(pts.size());
  Eigen::VectorXd r(2 * m);
  const double radius = std::sqrt(std::max(0.0, 1.0 - d * d));
  const double w = std::sqrt(weight);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Vec3& p = pts[static_cast<std::size_t>(i)];
    r(i) = n.dot(p) - d;
    r(m + i) = w * ((p - d * n).norm() - radius);
  }
  return r;
}

}  // namespace

RotationPlane fit_plane(std::span<const Vec3> pts, const PlaneFitConfig& cfg) {
  if (pts.size() < 3) {
    throw Error(ErrorKind::kInsufficientVisibility, "plane fit needs at least 3 logo positions");
  }
  Vec3 mean = Vec3::Zero();
  for (const Vec3& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());

  // A mean near the origin means the points are spread around a great
  // circle, which is anything but clustered.
  double max_angle = kPi;
  if (mean.norm() > 1e-9) {
    const Vec3 dir = mean.normalized();
    max_angle = 0.0;
    for (const Vec3& p : pts) {
      max_angle = std::max(max_angle, std::atan2(p.cross(dir).norm(), p.dot(dir)));
    }
  }
  if (max_angle < 0.5 * kDeg) {
    throw Error(ErrorKind::kSpinAxisIndeterminate,
                "logo positions barely move; rotation axis is indeterminate");
  }

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const Vec3& p : pts) cov += (p - mean) * (p - mean).transpose();
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  Vec3 n = eig.eigenvectors().col(0).normalized();
  double d = n.dot(mean);
  if (d < 0.0) {
    n = -n;
    d = -d;
  }

  // Levenberg-Marquardt over (two tangent rotations of n, d).
  constexpr double kDMax = 1.0 - 1e-12;
  const double w = cfg.circle_weight;
  Eigen::VectorXd res = plane_residuals(pts, n, d, w);
  double cost = res.squaredNorm();
  double lambda = 1e-3;
  for (int it = 0; it < cfg.max_iterations && cost > 0.0; ++it) {
    const Vec3 e1 = any_perpendicular(n);
    const Vec3 e2 = n.cross(e1);
    auto eval = [&](const Eigen::Vector3d& x) {
      const Vec3 nn = (n + x(0) * e1 + x(1) * e2).normalized();
      const double dd = std::clamp(d + x(2), -kDMax, kDMax);
      return plane_residuals(pts, nn, dd, w);
    };
    Eigen::MatrixXd jac(res.size(), 3);
    constexpr double h = 1e-7;
    for (int k = 0; k < 3; ++k) {
      Eigen::Vector3d step = Eigen::Vector3d::Zero();
      step(k) = h;
      jac.col(k) = (eval(step) - eval(-step)) / (2.0 * h);
    }
    const Eigen::Matrix3d jtj = jac.transpose() * jac;
    const Eigen::Vector3d grad = jac.transpose() * res;
    bool improved = false;
    for (int tries = 0; tries < 20; ++tries) {
      Eigen::Matrix3d damped = jtj;
      damped.diagonal() *= 1.0 + lambda;
      damped.diagonal().array() += 1e-15;
      const Eigen::Vector3d delta = -damped.ldlt().solve(grad);
      const Eigen::VectorXd trial = eval(delta);
      const double trial_cost = trial.squaredNorm();
      if (trial_cost < cost) {
        n = (n + delta(0) * e1 + delta(1) * e2).normalized();
        d = std::clamp(d + delta(2), -kDMax, kDMax);
        const double gain = cost - trial_cost;
        res = trial;
        cost = trial_cost;
        lambda = std::max(lambda * 0.3, 1e-12);
        improved = true;
        if (delta.norm() < cfg.tolerance || gain < cfg.tolerance * cfg.tolerance) it = cfg.max_iterations;
        break;
      }
      lambda *= 10.0;
    }
    if (!improved) break;
  }
  return RotationPlane{n, d};
}

RotationPlane fit_plane(std::span<const LogoObservation> observations,
                        const PlaneFitConfig& cfg) {
  std::vector<Vec3> pts;
  for (const LogoObservation& o : observations) {
    if (o.visible) pts.push_back(o.direction);
  }
  return fit_plane(pts, cfg);
}

AngularVelocity angular_velocity(std::span<const LogoObservation> observations,
                                 const RotationPlane& plane, const AngularConfig& cfg) {
  std::vector<std::size_t> visible;
  for (std::size_t i = 0; i < observations.size(); ++i) {
    if (observations[i].visible) visible.push_back(i);
  }
  if (visible.size() < 2) {
    throw Error(ErrorKind::kInsufficientVisibility,
                "angular velocity needs at least 2 visible logo positions");
  }

  const Vec3 n = plane.normal.normalized();
  const Vec3 e1 = any_perpendicular(n);
  const Vec3 e2 = n.cross(e1);
  auto in_plane_angle = [&](const Vec3& p) {
    const Vec3 q = p - p.dot(n) * n;
    return std::atan2(q.dot(e2), q.dot(e1)) / kDeg;
  };

  AngularVelocity out;
  AngleTrack& track = out.track;
  track.samples.push_back({observations[visible[0]].t, 0.0});

  double prev_angle = in_plane_angle(observations[visible[0]].direction);
  double accumulated = 0.0;
  double rate = 0.0;  // deg per frame
  bool have_rate = false;
  double max_delta = 0.0;
  std::vector<std::pair<double, std::size_t>> gaps;  // (duration, missing frames)

  bool rate_observed = false;  // some pair of detections is back to back
  for (std::size_t k = 1; k < visible.size(); ++k) {
    if (visible[k] - visible[k - 1] == 1) rate_observed = true;
  }
  if (cfg.gap_rule == GapRule::kPredicted) {
    // Seed the rate from the first pair of back-to-back detections so a gap
    // right after the first sighting is unwrapped by prediction too.
    for (std::size_t k = 1; k < visible.size() && !have_rate; ++k) {
      if (visible[k] - visible[k - 1] != 1) continue;
      rate = std::remainder(in_plane_angle(observations[visible[k]].direction) -
                                in_plane_angle(observations[visible[k - 1]].direction),
                            360.0);
      have_rate = true;
    }
  }

  for (std::size_t k = 1; k < visible.size(); ++k) {
    const LogoObservation& obs = observations[visible[k]];
    const std::size_t frames = visible[k] - visible[k - 1];
    const std::size_t missing = frames - 1;
    const double angle = in_plane_angle(obs.direction);
    double delta = std::remainder(angle - prev_angle, 360.0);
    const bool long_gap = missing >= cfg.half_revolution_gap && missing > 0;
    if (long_gap) gaps.emplace_back(obs.t - observations[visible[k - 1]].t, missing);

    if (have_rate && !(long_gap && cfg.gap_rule == GapRule::kAlwaysLong)) {
      // Representative closest to the rotation the current rate predicts. Across
      // a hidden stretch of more than half a turn this is the long angle.
      const double expected = rate * static_cast<double>(frames);
      delta += 360.0 * std::round((expected - delta) / 360.0);
    } else if (long_gap) {
      // The logo went round the hidden side: the long way, 360 - |short|.
      if (delta != 0.0) delta -= std::copysign(360.0, delta);
    }
    rate = delta / static_cast<double>(frames);
    have_rate = true;
    accumulated += delta;
    max_delta = std::max(max_delta, std::abs(delta));
    prev_angle = angle;
    track.samples.push_back({obs.t, accumulated});
  }

  // Ordinary least-squares line through (t, accumulated angle).
  const auto m = static_cast<double>(track.samples.size());
  double mt = 0.0, ma = 0.0;
  for (const AngleSample& s : track.samples) {
    mt += s.t;
    ma += s.accumulated_deg;
  }
  mt /= m;
  ma /= m;
  double stt = 0.0, sta = 0.0;
  for (const AngleSample& s : track.samples) {
    stt += (s.t - mt) * (s.t - mt);
    sta += (s.t - mt) * (s.accumulated_deg - ma);
  }
  if (!(stt > 0.0)) {
    throw Error(ErrorKind::kInsufficientVisibility, "logo timestamps do not span time");
  }
  double slope = sta / stt;
  double ss = 0.0;
  for (const AngleSample& s : track.samples) {
    const double r = s.accumulated_deg - (ma + slope * (s.t - mt));
    ss += r * r;
  }
  track.rms_deg = std::sqrt(ss / m);

  if (max_delta < cfg.static_delta_deg) {
    slope = 0.0;
    track.low_confidence = true;
  }
  track.slope_deg_s = slope;
  for (const auto& [duration, missing] : gaps) {
    if (std::abs(slope) * duration > 360.0) track.aliased = true;
  }
  // Every delta then spans a gap, so the turn count between detections is a
  // guess.
  if (!rate_observed && !gaps.empty()) track.aliased = true;

  SpinEstimate& est = out.estimate;
  est.omega.omega = slope * kDeg * n;
  est.rms_residual = track.rms_deg * kDeg;
  est.condition_number = 1.0;
  est.n_points = visible.size();
  est.method = magnus::SpinMethod::kLogoBackground;
  est.low_confidence = track.low_confidence || track.aliased;
  return out;
}

std::vector<ContourPixel> render_contour(const Vec3& direction, double radius_px,
                                         const SegmentGeometry& g, std::size_t samples) {
  if (!(radius_px > 0.0) || samples < 8 || !(g.logo_radius > 0.0) ||
      !(g.logo_radius < g.ball_radius)) {
    throw Error(ErrorKind::kInvalidArgument, "invalid contour rendering parameters");
  }
  const Vec3 c = direction.normalized();
  const double rho = g.logo_radius / g.ball_radius;
  const Vec3 e1 = any_perpendicular(c);
  const Vec3 e2 = c.cross(e1);
  std::vector<ContourPixel> out;
  std::size_t visible_rim = 0;
  for (std::size_t k = 0; k < samples; ++k) {
    const double phi = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(samples);
    const Vec3 p = std::cos(rho) * c + std::sin(rho) * (std::cos(phi) * e1 + std::sin(phi) * e2);
    if (p.z() > 0.0) {
      out.push_back({radius_px * p.x(), radius_px * p.y()});
      ++visible_rim;
    }
  }
  if (visible_rim < 3) return {};
  // Limb points (z = 0) inside the logo cap close the outline of a cut-off logo.
  const double cos_rho = std::cos(rho);
  for (std::size_t k = 0; k < 4 * samples; ++k) {
    const double phi = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(4 * samples);
    const Vec3 p(std::cos(phi), std::sin(phi), 0.0);
    if (p.dot(c) > cos_rho) out.push_back({radius_px * p.x(), radius_px * p.y()});
  }
  return out;
}

LogoObservation observe_logo(const LogoFrame& frame, const LogoConfig& cfg) {
  LogoObservation obs;
  obs.t = frame.t;
  if (frame.contour.empty()) return obs;
  const std::vector<Vec3> pts = project_contour(frame.contour, frame.radius_px);
  const Vec3 centroid = contour_centroid(pts);
  Vec3 center = centroid;
  if (cfg.segment_correction) {
    const SegmentClass cls = classify_segment(pts, cfg.geometry.limb_polar_deg);
    center = segment_correct(pts, centroid, cfg.geometry, cls).center;
  }
  obs.direction = center;
  obs.visible = true;
  return obs;
}

SpinEstimate estimate_spin_logo(std::span<const LogoObservation> observations,
                                const LogoConfig& cfg) {
  if (cfg.max_frames > 0 && observations.size() > cfg.max_frames) {
    observations = observations.last(cfg.max_frames);
  }
  const auto n_visible = std::count_if(observations.begin(), observations.end(),
                                       [](const LogoObservation& o) { return o.visible; });
  if (n_visible < 3) {
    throw Error(ErrorKind::kInsufficientVisibility,
                "need at least 3 visible logos, got " + std::to_string(n_visible));
  }
  const RotationPlane plane = fit_plane(observations, cfg.plane);
  return angular_velocity(observations, plane, cfg.angular).estimate;
}

SpinEstimate estimate_spin_logo(std::span<const LogoFrame> frames, const LogoConfig& cfg) {
  std::vector<LogoObservation> obs;
  obs.reserve(frames.size());
  for (const LogoFrame& f : frames) obs.push_back(observe_logo(f, cfg));
  return estimate_spin_logo(std::span<const LogoObservation>(obs), cfg);
}

}  // namespace spinest::logo
