#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace spinest::rotmath {

using Vec3 = Eigen::Vector3d;

/// Unit quaternion (w, x, y, z). Every constructor normalizes.
class Quat {
 public:
  Quat() = default;
  Quat(double w, double x, double y, double z);

  static Quat identity() { return {}; }

  double w() const { return w_; }
  double x() const { return x_; }
  double y() const { return y_; }
  double z() const { return z_; }
  Eigen::Vector4d coeffs() const { return {w_, x_, y_, z_}; }

  Quat operator-() const;
  Quat operator*(const Quat& rhs) const;
  Quat conjugate() const;
  Vec3 rotate(const Vec3& v) const;

 private:
  double w_ = 1.0, x_ = 0.0, y_ = 0.0, z_ = 0.0;
};

/// Rotation as unit axis plus angle in [0, pi].
///
/// At the degenerate angles 0 and pi the axis sign is fixed so that its first
/// nonzero component is positive; everywhere else a negative angle flips the
/// axis instead.
class AxisAngle {
 public:
  AxisAngle();
  AxisAngle(const Vec3& axis, double angle);

  /// Rotation vector (axis * angle); zero vector maps to the identity.
  static AxisAngle from_rotation_vector(const Vec3& rv);

  const Vec3& axis() const { return axis_; }
  double angle() const { return angle_; }
  Vec3 rotation_vector() const { return axis_ * angle_; }

 private:
  Vec3 axis_;
  double angle_;
};

/// Proper orthogonal 3x3 matrix (R^T R = I and det R = +1, both within 1e-9).
class RotMatrix {
 public:
  RotMatrix() : m_(Eigen::Matrix3d::Identity()) {}
  explicit RotMatrix(const Eigen::Matrix3d& m);

  static RotMatrix identity() { return {}; }

  const Eigen::Matrix3d& matrix() const { return m_; }
  Vec3 rotate(const Vec3& v) const { return m_ * v; }

 private:
  Eigen::Matrix3d m_;
};

Quat to_quat(const AxisAngle& aa);
Quat to_quat(const RotMatrix& r);
RotMatrix to_matrix(const Quat& q);
RotMatrix to_matrix(const AxisAngle& aa);
AxisAngle to_axis_angle(const Quat& q);
AxisAngle to_axis_angle(const RotMatrix& r);

/// exp map: rotation by |rv| about rv / |rv|.
Quat exp_map(const Vec3& rv);

/// Geodesic distance on SO(3): the angle of the rotation aligning R1 with R2,
/// arccos((tr(R1^T R2) - 1) / 2). Evaluated through atan2 of the sine and
/// cosine of that angle, which agrees with the arccos form and stays accurate
/// near 0 and pi.
double geodesic(const RotMatrix& r1, const RotMatrix& r2);

/// Quaternion form of the same metric, 2 arccos(|<q1, q2>|). Insensitive to
/// the double cover: geodesic(q, -q) == 0.
double geodesic(const Quat& q1, const Quat& q2);

/// Logo direction of an orientation: the base position (0, 0, 1) rotated by q.
Vec3 logo_direction(const Quat& q);

/// Angle between the logo directions of two orientations. Ignores any twist of
/// the ball about its own logo axis.
double vector_angle(const Quat& q1, const Quat& q2);

/// Pose-regression output or target: rotation part (4 quaternion components
/// or a 3-component rotation vector) plus a visibility value in [-1, 1].
///
/// Visibility is stored in label space (-1 hidden, +1 visible) and mapped to
/// (v + 1) / 2 when a loss is evaluated.
struct PoseOutput {
  PoseOutput(std::vector<double> rotation, double visibility);

  std::vector<double> rotation;
  double visibility;
};

/// Orientation term of the conditional loss.
///
/// kSquared is the term printed as L1 (squared differences, squared
/// classification term); kAbsolute is the one printed as L2 (absolute values).
/// kGeodesic uses the SO(3) geodesic distance between the two rotations.
enum class LossNorm { kSquared, kAbsolute, kGeodesic };

/// Conditional loss: classification term plus t_v times the sign-ambiguity
/// aware orientation term. The target visibility label must be exactly -1 or
/// +1. Throws Error(kContractViolation) on a rotation length mismatch.
double conditional_loss(const PoseOutput& output, const PoseOutput& target,
                        LossNorm norm);

}  // namespace spinest::rotmath
