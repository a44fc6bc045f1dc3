#include "spinest/eval.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <thread>

#include "spinest/error.hpp"

namespace spinest::eval {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Nominal launches: served from behind the far end of the table, tuned so
// every setting bounces on the near half of the 2.74 x 1.525 m table.
struct CatalogEntry {
  SpinType type;
  SpinLevel level;
  double spin;       // rad/s
  double speed;      // m/s
  double elevation;  // deg
  double yaw;        // deg, about +z
};

constexpr std::array<CatalogEntry, 9> kCatalog{{
    {SpinType::kBackspin, SpinLevel::kLow, 60.0, 5, 20.75, 0},
    {SpinType::kBackspin, SpinLevel::kMedium, 180.0, 5.5, 8, 0},
    {SpinType::kBackspin, SpinLevel::kHigh, 360.0, 6, -2.75, 0},
    {SpinType::kSidespin, SpinLevel::kLow, 60.0, 5, 25.25, -3.25},
    {SpinType::kSidespin, SpinLevel::kMedium, 180.0, 5.5, 17.75, -8.25},
    {SpinType::kSidespin, SpinLevel::kHigh, 360.0, 6, 13.25, -14.75},
    {SpinType::kTopspin, SpinLevel::kLow, 60.0, 5, 30.5, 0},
    {SpinType::kTopspin, SpinLevel::kMedium, 180.0, 5.5, 28.75, 0},
    {SpinType::kTopspin, SpinLevel::kHigh, 360.0, 6, 32.25, 0},
}};

const Vec3 kLaunchPosition(-1.5, 0.0, 0.30);

Vec3 spin_axis(SpinType type) {
  switch (type) {
    case SpinType::kBackspin: return {0.0, -1.0, 0.0};
    case SpinType::kSidespin: return {0.0, 0.0, 1.0};
    case SpinType::kTopspin: return {0.0, 1.0, 0.0};
  }
  return Vec3::Zero();
}

Vec3 launch_direction(double elevation_deg, double yaw_deg) {
  const double e = elevation_deg * kDeg;
  const double y = yaw_deg * kDeg;
  return {std::cos(e) * std::cos(y), std::cos(e) * std::sin(y), std::sin(e)};
}

// SplitMix64 finalizer; derives independent per-shot seeds.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double median(std::vector<double> v) {
  const std::size_t n = v.size();
  std::sort(v.begin(), v.end());
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void mean_std(const std::vector<double>& v, double& mean, double& stddev) {
  mean = 0.0;
  stddev = 0.0;
  if (v.empty()) return;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
}

ShotRecord run_shot(const SpinSetting& setting, std::size_t setting_index,
                    std::size_t shot_index, const BenchmarkConfig& cfg) {
  ShotRecord rec;
  rec.setting = setting.name;
  rec.index = shot_index;
  rec.seed = mix(cfg.seed ^ mix(setting_index * 1000003ULL + shot_index));

  const Shot shot = sample_shot(setting, cfg.variation, rec.seed);
  rec.true_omega = shot.omega.omega;
  const PhysicalConstants& c = cfg.constants;

  try {
    const auto bounce = physics::bounce_point(shot.launch, shot.omega, c);
    if (!bounce) throw Error(ErrorKind::kNoBounce, "shot never bounces");
    rec.true_bounce = bounce->position;

    physics::ObservationConfig obs_cfg;
    obs_cfg.rate = cfg.rate;
    obs_cfg.noise_sigma = cfg.noise_sigma;
    obs_cfg.seed = mix(rec.seed + 1);
    const physics::Trajectory flight =
        physics::simulate_observations(shot.launch, shot.omega, c, obs_cfg);

    rec.flight_omega = magnus::estimate_spin(flight, c, cfg.fit).omega.omega;

    const double cutoff = shot.launch.t + cfg.prefix_fraction * (bounce->t - shot.launch.t);
    std::size_t n_prefix = 0;
    while (n_prefix < flight.size() && flight[n_prefix].t <= cutoff) ++n_prefix;
    if (n_prefix < 2) throw Error(ErrorKind::kInsufficientData, "prefix too short");
    const physics::Trajectory prefix = flight.slice(0, n_prefix);
    const magnus::SpinEstimate est = magnus::estimate_spin(prefix, c, cfg.fit);
    rec.prefix_omega = est.omega.omega;

    // Both predictions start from the same filtered prefix endpoint.
    const physics::Trajectory filtered =
        cfg.fit.filter ? magnus::filter_outliers(prefix, cfg.fit.outliers) : prefix;
    magnus::PredictConfig pcfg;
    pcfg.window = cfg.fit.window;
    const auto fitted = magnus::predict_bounce(filtered, est.omega, c, pcfg);
    const auto nospin = magnus::predict_bounce(filtered, std::nullopt, c, pcfg);
    if (!fitted || !nospin) throw Error(ErrorKind::kNoBounce, "predicted flight never bounces");
    rec.fitted_bounce = fitted->position;
    rec.nospin_bounce = nospin->position;
    rec.fitted_error_mm = 1000.0 * (fitted->position - bounce->position).head<2>().norm();
    rec.nospin_error_mm = 1000.0 * (nospin->position - bounce->position).head<2>().norm();
  } catch (const Error& e) {
    rec.excluded = true;
    rec.reason = std::string(to_string(e.kind())) + ": " + e.what();
  }
  return rec;
}

}  // namespace

std::string_view to_string(SpinType type) {
  switch (type) {
    case SpinType::kBackspin: return "backspin";
    case SpinType::kSidespin: return "sidespin";
    case SpinType::kTopspin: return "topspin";
  }
  return "unknown";
}

std::string_view to_string(SpinLevel level) {
  switch (level) {
    case SpinLevel::kLow: return "low";
    case SpinLevel::kMedium: return "medium";
    case SpinLevel::kHigh: return "high";
  }
  return "unknown";
}

std::vector<SpinSetting> make_settings() {
  std::vector<SpinSetting> out;
  out.reserve(kCatalog.size());
  for (const CatalogEntry& e : kCatalog) {
    SpinSetting s;
    s.type = e.type;
    s.level = e.level;
    s.name = std::string(to_string(e.type)) + ":" + std::string(to_string(e.level));
    s.omega.omega = e.spin * spin_axis(e.type);
    s.launch.t = 0.0;
    s.launch.position = kLaunchPosition;
    s.launch.velocity = e.speed * launch_direction(e.elevation, e.yaw);
    out.push_back(std::move(s));
  }
  return out;
}

SpinSetting find_setting(std::string_view name) {
  std::string key(name);
  std::replace(key.begin(), key.end(), '/', ':');
  for (SpinSetting& s : make_settings()) {
    if (s.name == key) return s;
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown spin setting '" + std::string(name) + "'");
}

Shot sample_shot(const SpinSetting& setting, const Variation& var, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Shot shot;
  shot.omega.omega = setting.omega.omega * (1.0 + var.spin_rel_sigma * gauss(rng));

  const Vec3 v = setting.launch.velocity;
  const double speed = v.norm() * (1.0 + var.speed_rel_sigma * gauss(rng));
  const double elevation = std::asin(v.z() / v.norm()) / kDeg + var.direction_sigma_deg * gauss(rng);
  const double yaw = std::atan2(v.y(), v.x()) / kDeg + var.direction_sigma_deg * gauss(rng);
  shot.launch = setting.launch;
  shot.launch.velocity = speed * launch_direction(elevation, yaw);
  for (int a = 0; a < 3; ++a) shot.launch.position[a] += var.position_sigma * gauss(rng);
  return shot;
}

ClusterReport cluster_classify(std::span<const LabeledEstimates> groups) {
  if (groups.empty()) throw Error(ErrorKind::kInvalidArgument, "no settings to classify");

  // Work in lexicographic name order so ties resolve to the first name.
  std::vector<std::size_t> order(groups.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return groups[a].setting < groups[b].setting; });

  ClusterReport rep;
  const std::size_t k = groups.size();
  rep.settings.resize(k);
  rep.centers.resize(k);
  rep.accuracy.assign(k, 0.0);
  rep.correct.assign(k, 0);
  rep.counts.assign(k, 0);
  for (std::size_t g = 0; g < k; ++g) {
    const LabeledEstimates& grp = groups[g];
    if (grp.omegas.size() < 2) {
      throw Error(ErrorKind::kInsufficientData,
                  "setting '" + grp.setting + "' has fewer than 2 estimates");
    }
    rep.settings[g] = grp.setting;
    for (int a = 0; a < 3; ++a) {
      std::vector<double> comp;
      comp.reserve(grp.omegas.size());
      for (const Vec3& w : grp.omegas) comp.push_back(w[a]);
      rep.centers[g][a] = median(std::move(comp));
    }
  }
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      if (rep.centers[a] == rep.centers[b]) rep.degenerate = true;
    }
  }

  std::size_t total_correct = 0, total = 0;
  for (std::size_t g = 0; g < k; ++g) {
    for (const Vec3& w : groups[g].omegas) {
      std::size_t best = order[0];
      double best_dist = (w - rep.centers[best]).norm();
      for (std::size_t j = 1; j < k; ++j) {
        const double d = (w - rep.centers[order[j]]).norm();
        if (d < best_dist) {
          best = order[j];
          best_dist = d;
        }
      }
      ++rep.counts[g];
      if (best == g) ++rep.correct[g];
    }
    rep.accuracy[g] = static_cast<double>(rep.correct[g]) / static_cast<double>(rep.counts[g]);
    total_correct += rep.correct[g];
    total += rep.counts[g];
  }
  rep.total_accuracy = static_cast<double>(total_correct) / static_cast<double>(total);
  return rep;
}

BenchmarkResult bounce_benchmark(std::span<const SpinSetting> settings,
                                 const BenchmarkConfig& cfg) {
  if (cfg.n_per_setting < 2) {
    throw Error(ErrorKind::kInvalidArgument, "benchmark needs at least 2 shots per setting");
  }
  if (!(cfg.prefix_fraction > 0.0 && cfg.prefix_fraction <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "prefix fraction must lie in (0, 1]");
  }
  cfg.constants.validate();

  const std::size_t total = settings.size() * cfg.n_per_setting;
  BenchmarkResult result;
  result.records.resize(total);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      const std::size_t s = i / cfg.n_per_setting;
      result.records[i] = run_shot(settings[s], s, i % cfg.n_per_setting, cfg);
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(cfg.jobs, 1, 256);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(jobs);
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  for (std::size_t s = 0; s < settings.size(); ++s) {
    BounceRow row;
    row.setting = settings[s].name;
    std::vector<double> fitted, nospin;
    for (std::size_t k = 0; k < cfg.n_per_setting; ++k) {
      const ShotRecord& r = result.records[s * cfg.n_per_setting + k];
      if (r.excluded) {
        ++row.excluded;
        continue;
      }
      fitted.push_back(r.fitted_error_mm);
      nospin.push_back(r.nospin_error_mm);
      if (r.fitted_error_mm < r.nospin_error_mm) ++row.fitted_wins;
    }
    row.used = fitted.size();
    mean_std(fitted, row.fitted_mean_mm, row.fitted_std_mm);
    mean_std(nospin, row.nospin_mean_mm, row.nospin_std_mm);
    result.rows.push_back(row);
  }
  return result;
}

std::vector<LabeledEstimates> flight_estimates(const BenchmarkResult& result) {
  std::vector<LabeledEstimates> out;
  std::map<std::string, std::size_t> index;
  for (const ShotRecord& r : result.records) {
    auto [it, inserted] = index.try_emplace(r.setting, out.size());
    if (inserted) out.push_back({r.setting, {}});
    if (r.flight_omega) out[it->second].omegas.push_back(*r.flight_omega);
  }
  return out;
}

double bat_pitch(double beta_spin_deg_s) {
  constexpr double kAnchorSpin = 360.0;
  constexpr double kBackspinPitch = -40.0;
  constexpr double kTopspinPitch = 28.0;
  const double clamped = std::clamp(beta_spin_deg_s, -kAnchorSpin, kAnchorSpin);
  const double u = (clamped + kAnchorSpin) / (2.0 * kAnchorSpin);
  return kBackspinPitch + u * (kTopspinPitch - kBackspinPitch);
}

}  // namespace spinest::eval
