#include "spinest/rotmath.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

#include "spinest/error.hpp"

namespace spinest::rotmath {

namespace {

constexpr double kUnitTol = 1e-9;

// First nonzero component positive; used only at the 0 / pi degeneracies.
Vec3 canonical_sign(const Vec3& axis) {
  for (int i = 0; i < 3; ++i) {
    if (std::abs(axis[i]) > 1e-12) return axis[i] > 0 ? axis : Vec3(-axis);
  }
  return axis;
}

Quat from_eigen(const Eigen::Quaterniond& q) {
  return {q.w(), q.x(), q.y(), q.z()};
}

Eigen::Quaterniond to_eigen(const Quat& q) {
  return {q.w(), q.x(), q.y(), q.z()};
}

}  // namespace

Quat::Quat(double w, double x, double y, double z) {
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  if (!(n > 1e-12) || !std::isfinite(n)) {
    throw Error(ErrorKind::kInvalidArgument, "quaternion has zero norm");
  }
  w_ = w / n;
  x_ = x / n;
  y_ = y / n;
  z_ = z / n;
}

// Sign flips keep the norm, so these skip renormalization and stay exact.
Quat Quat::operator-() const {
  Quat q;
  q.w_ = -w_;
  q.x_ = -x_;
  q.y_ = -y_;
  q.z_ = -z_;
  return q;
}

Quat Quat::conjugate() const {
  Quat q;
  q.w_ = w_;
  q.x_ = -x_;
  q.y_ = -y_;
  q.z_ = -z_;
  return q;
}

Quat Quat::operator*(const Quat& r) const {
  return {w_ * r.w_ - x_ * r.x_ - y_ * r.y_ - z_ * r.z_,
          w_ * r.x_ + x_ * r.w_ + y_ * r.z_ - z_ * r.y_,
          w_ * r.y_ - x_ * r.z_ + y_ * r.w_ + z_ * r.x_,
          w_ * r.z_ + x_ * r.y_ - y_ * r.x_ + z_ * r.w_};
}

Vec3 Quat::rotate(const Vec3& v) const {
  const Vec3 u(x_, y_, z_);
  const Vec3 t = 2.0 * u.cross(v);
  return v + w_ * t + u.cross(t);
}

AxisAngle::AxisAngle() : axis_(1.0, 0.0, 0.0), angle_(0.0) {}

AxisAngle::AxisAngle(const Vec3& axis, double angle) {
  const double n = axis.norm();
  if (!(n > 1e-12) || !std::isfinite(angle)) {
    throw Error(ErrorKind::kInvalidArgument, "axis-angle needs a nonzero axis");
  }
  Vec3 a = axis / n;
  // Reduce to (-pi, pi], then fold the sign into the axis.
  double t = std::remainder(angle, 2.0 * std::numbers::pi);
  if (t < 0) {
    t = -t;
    a = -a;
  }
  if (t < 1e-15 || std::abs(t - std::numbers::pi) < 1e-15) a = canonical_sign(a);
  axis_ = a;
  angle_ = t;
}

AxisAngle AxisAngle::from_rotation_vector(const Vec3& rv) {
  const double angle = rv.norm();
  if (angle < 1e-300) return {};
  return {rv / angle, angle};
}

RotMatrix::RotMatrix(const Eigen::Matrix3d& m) : m_(m) {
  const double orth = (m.transpose() * m - Eigen::Matrix3d::Identity()).norm();
  if (!(orth < kUnitTol) || std::abs(m.determinant() - 1.0) > kUnitTol) {
    throw Error(ErrorKind::kInvalidArgument, "matrix is not a proper rotation");
  }
}

Quat to_quat(const AxisAngle& aa) {
  const double h = 0.5 * aa.angle();
  const Vec3 v = aa.axis() * std::sin(h);
  return {std::cos(h), v.x(), v.y(), v.z()};
}

Quat to_quat(const RotMatrix& r) {
  return from_eigen(Eigen::Quaterniond(r.matrix()));
}

RotMatrix to_matrix(const Quat& q) {
  Eigen::Matrix3d m = to_eigen(q).toRotationMatrix();
  return RotMatrix(m);
}

RotMatrix to_matrix(const AxisAngle& aa) { return to_matrix(to_quat(aa)); }

AxisAngle to_axis_angle(const Quat& q) {
  const Vec3 v(q.x(), q.y(), q.z());
  const double s = v.norm();
  if (s < 1e-300) return {};
  // atan2 keeps small angles accurate; a negative w yields an angle beyond pi
  // that the AxisAngle constructor folds back.
  return {v / s, 2.0 * std::atan2(s, q.w())};
}

AxisAngle to_axis_angle(const RotMatrix& r) { return to_axis_angle(to_quat(r)); }

Quat exp_map(const Vec3& rv) {
  return to_quat(AxisAngle::from_rotation_vector(rv));
}

double geodesic(const RotMatrix& r1, const RotMatrix& r2) {
  const Eigen::Matrix3d rel = r1.matrix().transpose() * r2.matrix();
  const double cos_theta = std::clamp((rel.trace() - 1.0) / 2.0, -1.0, 1.0);
  const Vec3 skew(rel(2, 1) - rel(1, 2), rel(0, 2) - rel(2, 0),
                  rel(1, 0) - rel(0, 1));
  const double sin_theta = 0.5 * skew.norm();
  return std::atan2(sin_theta, cos_theta);
}

double geodesic(const Quat& q1, const Quat& q2) {
  // Relative rotation q1^* q2 written out: its w is <q1,q2> and its vector
  // part w1 v2 - w2 v1 - v1 x v2 carries the matching sine. In this form the
  // vector part is exactly zero for q2 = +-q1.
  const Vec3 v1(q1.x(), q1.y(), q1.z());
  const Vec3 v2(q2.x(), q2.y(), q2.z());
  const double c = std::min(std::abs(q1.w() * q2.w() + v1.dot(v2)), 1.0);
  const double s = (q1.w() * v2 - q2.w() * v1 - v1.cross(v2)).norm();
  return 2.0 * std::atan2(s, c);
}

Vec3 logo_direction(const Quat& q) { return q.rotate(Vec3::UnitZ()); }

double vector_angle(const Quat& q1, const Quat& q2) {
  const Vec3 a = logo_direction(q1);
  const Vec3 b = logo_direction(q2);
  return std::atan2(a.cross(b).norm(), std::clamp(a.dot(b), -1.0, 1.0));
}

PoseOutput::PoseOutput(std::vector<double> rot, double vis)
    : rotation(std::move(rot)), visibility(std::clamp(vis, -1.0, 1.0)) {}

namespace {

Quat pose_rotation(const std::vector<double>& r) {
  if (r.size() == 4) return {r[0], r[1], r[2], r[3]};
  if (r.size() == 3) return exp_map(Vec3(r[0], r[1], r[2]));
  throw Error(ErrorKind::kContractViolation,
              "geodesic loss needs a 4-component quaternion or 3-component "
              "rotation vector");
}

}  // namespace

double conditional_loss(const PoseOutput& o, const PoseOutput& t,
                        LossNorm norm) {
  if (o.rotation.size() != t.rotation.size() || o.rotation.empty()) {
    throw Error(ErrorKind::kContractViolation,
                "pose outputs differ in rotation length");
  }
  if (t.visibility != -1.0 && t.visibility != 1.0) {
    throw Error(ErrorKind::kContractViolation,
                "target visibility label must be -1 or +1");
  }
  const double ov = (o.visibility + 1.0) / 2.0;
  const double tv = (t.visibility + 1.0) / 2.0;
  const double dv = ov - tv;

  switch (norm) {
    case LossNorm::kSquared: {
      double minus = 0.0, plus = 0.0;
      for (std::size_t i = 0; i < o.rotation.size(); ++i) {
        minus += (o.rotation[i] - t.rotation[i]) * (o.rotation[i] - t.rotation[i]);
        plus += (o.rotation[i] + t.rotation[i]) * (o.rotation[i] + t.rotation[i]);
      }
      return dv * dv + tv * std::min(minus, plus);
    }
    case LossNorm::kAbsolute: {
      double minus = 0.0, plus = 0.0;
      for (std::size_t i = 0; i < o.rotation.size(); ++i) {
        minus += std::abs(o.rotation[i] - t.rotation[i]);
        plus += std::abs(o.rotation[i] + t.rotation[i]);
      }
      return std::abs(dv) + tv * std::min(minus, plus);
    }
    case LossNorm::kGeodesic: {
      if (tv == 0.0) return std::abs(dv);
      return std::abs(dv) +
             tv * geodesic(pose_rotation(o.rotation), pose_rotation(t.rotation));
    }
  }
  return 0.0;
}

}  // namespace spinest::rotmath
