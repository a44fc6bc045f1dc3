#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

#include <Eigen/Core>

#include "spinest/physics.hpp"

namespace spinest::magnus {

using physics::BallState;
using physics::PhysicalConstants;
using physics::SpinVector;
using physics::Trajectory;
using Vec3 = Eigen::Vector3d;

/// Per-axis cubic least-squares fit P(t), stored in centred time
/// tau = t - t0 where t0 is the midpoint of the fit window.
struct PolyFit3 {
  /// Row k holds the tau^k coefficients of the x, y and z polynomials.
  Eigen::Matrix<double, 4, 3> coeffs = Eigen::Matrix<double, 4, 3>::Zero();
  double t0 = 0.0;
  double t_start = 0.0;
  double t_end = 0.0;
  double rms_residual = 0.0;  // m, Euclidean per sample
  std::size_t n_points = 0;

  Vec3 position(double t) const;
  Vec3 velocity(double t) const;
  Vec3 acceleration(double t) const;
};

enum class SpinMethod { kTrajectory, kLogoBackground, kLogoCnnExternal };

constexpr std::string_view to_string(SpinMethod m) {
  switch (m) {
    case SpinMethod::kTrajectory: return "trajectory";
    case SpinMethod::kLogoBackground: return "logo_bg";
    case SpinMethod::kLogoCnnExternal: return "logo_cnn-external";
  }
  return "unknown";
}

struct SpinEstimate {
  SpinVector omega;
  /// Trajectory method: RMS of M omega - a (m/s^2). Logo method: RMS of the
  /// angle regression (rad).
  double rms_residual = 0.0;
  double condition_number = 1.0;
  std::size_t n_points = 0;
  SpinMethod method = SpinMethod::kTrajectory;
  bool low_confidence = false;
};

/// Ordinary least squares cubic per axis over samples [first, last).
/// Needs at least 5 samples. Throws Error(kRankDeficient) when the design
/// matrix loses rank.
PolyFit3 fit_polynomial(const Trajectory& traj, std::size_t first, std::size_t last);

inline PolyFit3 fit_polynomial(const Trajectory& traj) {
  return fit_polynomial(traj, 0, traj.size());
}

/// Largest condition number of the stacked Magnus system accepted before the
/// geometry is declared degenerate.
inline constexpr double kMaxConditionNumber = 1e8;

/// Least-squares spin from the Magnus balance
///   k_M (omega x P'(t)) = P''(t) + k_D |P'(t)| P'(t) + (0, 0, g)
/// stacked over `times`, solved by Householder QR. The drag rows are
/// orthogonal to the Magnus columns, so the solution does not depend on k_D.
///
/// Throws Error(kInsufficientData) for fewer than 3 times and
/// Error(kDegenerateGeometry) when the velocity direction barely changes
/// (spread <= 0.1 degree) or the condition number exceeds 1e8.
SpinEstimate solve_spin(const PolyFit3& fit, std::span<const double> times,
                        const PhysicalConstants& c);

struct OutlierConfig {
  double threshold = 0.02;    // m, distance of a candidate from the local fit
  std::size_t head_len = 20;  // leading observations to scan
  std::size_t window = 5;     // accepted points backing each local fit
};

/// Removes spurious detections at the start of a flight.
///
/// The first head_len observations are scanned back to front: a cubic is fit
/// through the `window` nearest accepted later observations and the next
/// earlier candidate is dropped when its distance from that fit exceeds the
/// threshold; otherwise it joins the window. Trajectories shorter than
/// head_len + window are scanned in full. Throws Error(kInsufficientData)
/// when fewer than `window` points would remain.
Trajectory filter_outliers(const Trajectory& traj, const OutlierConfig& cfg = {});

/// Fit window sentinel: use every observation of the segment.
inline constexpr std::size_t kWholeSegment = 0;

struct FitConfig {
  std::size_t window = kWholeSegment;  // most recent observations fed to the fit
  std::size_t min_points = 10;  // after outlier filtering
  bool filter = true;
  OutlierConfig outliers;
};

/// filter_outliers, cubic fit over the most recent `window` observations and
/// solve_spin at every observation time inside that window. An estimate above
/// SpinVector::kMaxMagnitude means the noise swamped the poorly observed
/// component and is reported as Error(kDegenerateGeometry).
SpinEstimate estimate_spin(const Trajectory& traj, const PhysicalConstants& c,
                           const FitConfig& cfg = {});

struct PredictConfig {
  std::size_t window = kWholeSegment;
  physics::BounceConfig bounce;
};

/// Launch state at the end of a trajectory prefix: position and velocity of
/// the cubic fit at the last observation time.
BallState endpoint_state(const Trajectory& prefix, std::size_t window = kWholeSegment);

/// Bounce point predicted from the prefix endpoint state, integrating with the
/// given spin, or with zero spin for the no-spin baseline.
std::optional<physics::BouncePoint> predict_bounce(
    const Trajectory& prefix, const std::optional<SpinVector>& spin,
    const PhysicalConstants& c, const PredictConfig& cfg = {});

}  // namespace spinest::magnus
