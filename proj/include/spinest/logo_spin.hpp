#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "spinest/magnus_fit.hpp"
#include "spinest/physics.hpp"

namespace spinest::logo {

using magnus::SpinEstimate;
using physics::LogoObservation;
using Vec3 = Eigen::Vector3d;

/// Contour pixel relative to the ball centre in the image crop.
struct ContourPixel {
  double u = 0.0;
  double v = 0.0;
};

/// One camera frame: the logo contour (empty when no logo was detected) and
/// the fitted ball radius in pixels.
struct LogoFrame {
  double t = 0.0;
  double radius_px = 0.0;
  std::vector<ContourPixel> contour;
};

/// Lifts contour pixels onto the camera-facing hemisphere of the unit ball:
/// x = u / R, y = v / R, z = sqrt(1 - x^2 - y^2). Pixels up to 1 px outside
/// the disc are clamped onto the limb; farther ones are rejected.
std::vector<Vec3> project_contour(std::span<const ContourPixel> pixels, double radius_px);

/// Normalized mean of the contour points. Throws Error(kDegenerateCentroid)
/// for fewer than 3 points or a mean shorter than 1e-6.
Vec3 contour_centroid(std::span<const Vec3> points);

enum class SegmentClass { kFull, kPartial };

/// kPartial iff any point lies farther than `limb_polar_deg` from the pole
/// (0, 0, 1), i.e. close to the visible limb of the ball.
SegmentClass classify_segment(std::span<const Vec3> points, double limb_polar_deg = 80.0);

/// Circular segment of a disc of radius r cut by a chord, parameterized by the
/// half angle alpha in (0, pi] subtended by its arc.
double segment_area(double alpha, double r);
/// Distance from the disc centre to the segment's centroid.
double segment_centroid_offset(double alpha, double r);
/// Inverse of segment_area on (0, pi] by bisection. area must lie in
/// (0, pi r^2].
double segment_half_angle(double area, double r);

struct SegmentGeometry {
  double logo_radius = 0.0065;  // m
  double ball_radius = 0.02;    // m
  double limb_polar_deg = 80.0;
};

struct SegmentCorrection {
  Vec3 center = Vec3::UnitZ();
  bool corrected = false;
  /// Area estimate fell outside (0, pi r^2] or the limb direction was
  /// undefined; `center` is the uncorrected centroid.
  bool fallback = false;
  double half_angle = 0.0;  // rad
  double offset = 0.0;      // m, centroid to logo centre
};

/// Moves the centroid of a partially visible logo onto the logo's true centre.
///
/// The segment area is approximated as pi * dbar^2 with dbar the mean
/// tangent-plane distance (in metres) from the contour to the centroid. The
/// half angle follows from inverting the area formula; the centroid is then
/// rotated towards the limb by offset / ball_radius radians about the axis
/// perpendicular to the centroid and to the direction of the contour's limb
/// points. Full contours are returned unchanged.
SegmentCorrection segment_correct(std::span<const Vec3> points, const Vec3& centroid,
                                  const SegmentGeometry& geometry, SegmentClass cls);

/// Plane n . p = offset cutting the unit sphere in the logo's rotation circle.
struct RotationPlane {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;

  double circle_radius() const;
};

struct PlaneFitConfig {
  double circle_weight = 1.0;  // lambda between plane and circle distances
  double tolerance = 1e-10;
  int max_iterations = 200;
};

/// Fits the rotation plane through logo centres by minimizing
///   sum (n.p - d)^2 + lambda (|p - d n| - sqrt(1 - d^2))^2
/// starting from the total-least-squares plane.
/// Throws Error(kInsufficientVisibility) below 3 points and
/// Error(kSpinAxisIndeterminate) when every point lies within 0.5 degree of
/// a single direction.
RotationPlane fit_plane(std::span<const Vec3> points, const PlaneFitConfig& cfg = {});
RotationPlane fit_plane(std::span<const LogoObservation> observations,
                        const PlaneFitConfig& cfg = {});

struct AngleSample {
  double t = 0.0;
  double accumulated_deg = 0.0;
};

struct AngleTrack {
  std::vector<AngleSample> samples;
  double slope_deg_s = 0.0;
  double rms_deg = 0.0;
  /// Some gap spanned more than a full revolution at the fitted speed, or no
  /// two detections were back to back so the turns per gap are a guess.
  bool aliased = false;
  bool low_confidence = false;
};

/// How a gap of at least `half_revolution_gap` missing frames is unwrapped.
enum class GapRule {
  /// Representative closest to the rotation predicted by the rate seen on
  /// neighbouring detections; the long angle 360 - short whenever that rate
  /// implies more than half a turn, and always when no rate is known yet.
  kPredicted,
  /// Always the long angle 360 - short. Misreads slow spins whose logo hides
  /// for a few frames without completing half a turn.
  kAlwaysLong,
};

struct AngularConfig {
  /// Missing frames between two detections that count as a hidden stretch.
  std::size_t half_revolution_gap = 2;
  GapRule gap_rule = GapRule::kPredicted;
  /// Below this per-step change (deg) everywhere the track counts as static.
  double static_delta_deg = 0.05;
};

struct AngularVelocity {
  AngleTrack track;
  SpinEstimate estimate;
};

/// Angular velocity from logo directions projected into the rotation plane.
///
/// Invisible observations mark missing frames. Each delta is unwrapped
/// towards the previous per-frame rate; across long gaps the GapRule decides
/// whether the logo travelled the long way round. The slope of the least-squares line
/// through (t, accumulated angle) times the plane normal is the spin vector.
AngularVelocity angular_velocity(std::span<const LogoObservation> observations,
                                 const RotationPlane& plane,
                                 const AngularConfig& cfg = {});

struct LogoConfig {
  SegmentGeometry geometry;
  PlaneFitConfig plane;
  AngularConfig angular;
  /// Use only the most recent `max_frames` frames; 0 keeps all of them.
  std::size_t max_frames = 0;
  /// Apply circular-segment correction to partially visible logos.
  bool segment_correction = true;
};

/// Logo observation of a single frame: projection, centroid and (optionally)
/// circular-segment correction. An empty contour yields an invisible frame.
LogoObservation observe_logo(const LogoFrame& frame, const LogoConfig& cfg = {});

/// Synthetic contour of a logo centred on `direction`: the visible part of its
/// rim (a circle of angular radius logo_radius / ball_radius on the ball) plus
/// the stretch of the limb that bounds it when the logo is cut off, in pixels
/// for a ball of `radius_px`. Empty when fewer than 3 rim samples are visible.
std::vector<ContourPixel> render_contour(const Vec3& direction, double radius_px,
                                         const SegmentGeometry& geometry = {},
                                         std::size_t samples = 64);

/// Full pipeline from logo centres: plane fit then angular velocity.
/// Throws Error(kInsufficientVisibility) for fewer than 3 visible logos.
SpinEstimate estimate_spin_logo(std::span<const LogoObservation> observations,
                                const LogoConfig& cfg = {});

/// Full pipeline from contours.
SpinEstimate estimate_spin_logo(std::span<const LogoFrame> frames,
                                const LogoConfig& cfg = {});

}  // namespace spinest::logo
