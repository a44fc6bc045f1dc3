#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "spinest/magnus_fit.hpp"
#include "spinest/physics.hpp"

namespace spinest::eval {

using physics::BallState;
using physics::PhysicalConstants;
using physics::SpinVector;
using Vec3 = Eigen::Vector3d;

enum class SpinType { kBackspin, kSidespin, kTopspin };
enum class SpinLevel { kLow, kMedium, kHigh };

std::string_view to_string(SpinType type);
std::string_view to_string(SpinLevel level);

/// Synthetic throwing-machine setting. The magnitudes are invented for
/// simulation (60 / 180 / 360 rad/s at 5 / 5.5 / 6 m/s); they are not measured
/// machine values.
struct SpinSetting {
  std::string name;  // "<type>:<level>", e.g. "topspin:high"
  SpinType type = SpinType::kTopspin;
  SpinLevel level = SpinLevel::kLow;
  SpinVector omega;
  BallState launch;
};

/// The 9 catalogue settings, ordered backspin, sidespin, topspin and
/// low, medium, high within each type.
std::vector<SpinSetting> make_settings();

/// Looks up "<type>:<level>" (a '/' separator is accepted too).
/// Throws Error(kInvalidArgument) for unknown names.
SpinSetting find_setting(std::string_view name);

/// Shot-to-shot scatter of a throwing machine around a setting's nominal
/// launch.
struct Variation {
  double spin_rel_sigma = 0.05;
  double speed_rel_sigma = 0.02;
  double direction_sigma_deg = 1.0;
  double position_sigma = 0.01;  // m
};

struct Shot {
  BallState launch;
  SpinVector omega;
};

/// One perturbed shot of a setting; deterministic per seed.
Shot sample_shot(const SpinSetting& setting, const Variation& variation, std::uint64_t seed);

/// Estimated spin vectors grouped by the setting that produced them.
struct LabeledEstimates {
  std::string setting;
  std::vector<Vec3> omegas;
};

struct ClusterReport {
  std::vector<std::string> settings;
  std::vector<Vec3> centers;        // component-wise medians
  std::vector<double> accuracy;     // per setting, in [0, 1]
  std::vector<std::size_t> correct;
  std::vector<std::size_t> counts;
  double total_accuracy = 0.0;
  /// Two settings share a centre, so assignments between them are decided by
  /// the name tie-break alone.
  bool degenerate = false;
};

/// Nearest-median classification: each setting's centre is the component-wise
/// median of its estimates, every estimate goes to the nearest centre
/// (Euclidean, rad/s) with ties broken towards the lexicographically first
/// setting name. Needs at least 2 estimates per setting.
ClusterReport cluster_classify(std::span<const LabeledEstimates> groups);

struct BenchmarkConfig {
  std::size_t n_per_setting = 50;
  double noise_sigma = 0.002;  // m
  double rate = 380.0;         // Hz
  double prefix_fraction = 0.6;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  PhysicalConstants constants;
  magnus::FitConfig fit;
  Variation variation;
};

/// Everything recorded for one simulated shot.
struct ShotRecord {
  std::string setting;
  std::size_t index = 0;
  std::uint64_t seed = 0;
  Vec3 true_omega = Vec3::Zero();
  Vec3 true_bounce = Vec3::Zero();
  /// Spin estimated from the whole pre-bounce flight (used for clustering).
  std::optional<Vec3> flight_omega;
  /// Spin estimated from the truncated prefix (used for bounce prediction).
  std::optional<Vec3> prefix_omega;
  std::optional<Vec3> fitted_bounce;
  std::optional<Vec3> nospin_bounce;
  double fitted_error_mm = 0.0;
  double nospin_error_mm = 0.0;
  bool excluded = false;
  std::string reason;
};

struct BounceRow {
  std::string setting;
  double fitted_mean_mm = 0.0;
  double fitted_std_mm = 0.0;
  double nospin_mean_mm = 0.0;
  double nospin_std_mm = 0.0;
  std::size_t used = 0;
  std::size_t excluded = 0;
  /// Shots where the fitted-spin prediction beat the no-spin baseline.
  std::size_t fitted_wins = 0;
};

struct BenchmarkResult {
  std::vector<BounceRow> rows;
  std::vector<ShotRecord> records;  // ordered by setting, then shot index
};

/// Simulates n_per_setting noisy shots per setting, estimates spin from the
/// first prefix_fraction of each pre-bounce flight and predicts the bounce
/// with that spin and with zero spin. Errors are horizontal distances to the
/// simulated bounce. Shots whose estimation fails are excluded and counted.
/// Work fans out over `jobs` threads; results do not depend on scheduling.
BenchmarkResult bounce_benchmark(std::span<const SpinSetting> settings,
                                 const BenchmarkConfig& cfg);

/// Groups the whole-flight spin estimates of a benchmark run by setting.
std::vector<LabeledEstimates> flight_estimates(const BenchmarkResult& result);

/// Bat pitch (deg) for a topspin/backspin rate beta_spin (deg/s): linear
/// through (-360, -40) and (+360, 28), held constant beyond the anchors.
double bat_pitch(double beta_spin_deg_s);

}  // namespace spinest::eval
