#include "spinest/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <map>

#include "spinest/error.hpp"

namespace spinest {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(std::string_view key, std::string_view text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw Error(ErrorKind::kInvalidArgument,
                "config key '" + std::string(key) + "': not a number: '" + std::string(text) + "'");
  }
  return v;
}

std::uint64_t to_uint(std::string_view key, std::string_view text) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorKind::kInvalidArgument, "config key '" + std::string(key) +
                                                 "': not a non-negative integer: '" +
                                                 std::string(text) + "'");
  }
  return v;
}

bool to_bool(std::string_view key, std::string_view text) {
  if (text == "1" || text == "true" || text == "on") return true;
  if (text == "0" || text == "false" || text == "off") return false;
  throw Error(ErrorKind::kInvalidArgument,
              "config key '" + std::string(key) + "': not a boolean: '" + std::string(text) + "'");
}

using Setter = std::function<void(RunConfig&, std::string_view, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  auto real = [](double RunConfig::*field) {
    return [field](RunConfig& c, std::string_view k, std::string_view v) { c.*field = to_double(k, v); };
  };
  auto constant = [](double physics::PhysicalConstants::*field) {
    return [field](RunConfig& c, std::string_view k, std::string_view v) {
      c.constants.*field = to_double(k, v);
    };
  };
  auto count = [](auto getter) {
    return [getter](RunConfig& c, std::string_view k, std::string_view v) {
      getter(c) = static_cast<std::size_t>(to_uint(k, v));
    };
  };
  static const std::map<std::string, Setter, std::less<>> table{
      {"mass", constant(&physics::PhysicalConstants::mass)},
      {"radius", constant(&physics::PhysicalConstants::radius)},
      {"gravity", constant(&physics::PhysicalConstants::gravity)},
      {"drag_coeff", constant(&physics::PhysicalConstants::drag_coeff)},
      {"lift_coeff", constant(&physics::PhysicalConstants::lift_coeff)},
      {"air_density", constant(&physics::PhysicalConstants::air_density)},
      {"noise", real(&RunConfig::noise_sigma)},
      {"rate", real(&RunConfig::rate)},
      {"logo_rate", real(&RunConfig::logo_rate)},
      {"miss_prob", real(&RunConfig::miss_prob)},
      {"prefix_fraction", real(&RunConfig::prefix_fraction)},
      {"min_cluster_accuracy", real(&RunConfig::min_cluster_accuracy)},
      {"max_topspin_high_ratio", real(&RunConfig::max_topspin_high_ratio)},
      {"seed", [](RunConfig& c, std::string_view k, std::string_view v) { c.seed = to_uint(k, v); }},
      {"jobs", count([](RunConfig& c) -> std::size_t& { return c.jobs; })},
      {"out", [](RunConfig& c, std::string_view, std::string_view v) { c.out_dir = std::string(v); }},
      {"fit_window", count([](RunConfig& c) -> std::size_t& { return c.fit.window; })},
      {"min_points", count([](RunConfig& c) -> std::size_t& { return c.fit.min_points; })},
      {"outlier_filter",
       [](RunConfig& c, std::string_view k, std::string_view v) { c.fit.filter = to_bool(k, v); }},
      {"outlier_threshold",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         c.fit.outliers.threshold = to_double(k, v);
       }},
      {"outlier_head", count([](RunConfig& c) -> std::size_t& { return c.fit.outliers.head_len; })},
      {"n_per_setting", count([](RunConfig& c) -> std::size_t& { return c.n_per_setting; })},
      {"logo_frames", count([](RunConfig& c) -> std::size_t& { return c.logo.max_frames; })},
      {"logo_radius",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         c.logo.geometry.logo_radius = to_double(k, v);
       }},
      {"circle_weight",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         c.logo.plane.circle_weight = to_double(k, v);
       }},
      {"half_revolution_gap",
       count([](RunConfig& c) -> std::size_t& { return c.logo.angular.half_revolution_gap; })},
      {"gap_rule",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         if (v == "predicted") {
           c.logo.angular.gap_rule = logo::GapRule::kPredicted;
         } else if (v == "always_long") {
           c.logo.angular.gap_rule = logo::GapRule::kAlwaysLong;
         } else {
           throw Error(ErrorKind::kInvalidArgument,
                       std::string(k) + " must be 'predicted' or 'always_long'");
         }
       }},
      {"segment_correction",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         c.logo.segment_correction = to_bool(k, v);
       }},
      {"spin_variation",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         c.variation.spin_rel_sigma = to_double(k, v);
       }},
      {"speed_variation",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         c.variation.speed_rel_sigma = to_double(k, v);
       }},
  };
  return table;
}

}  // namespace

void RunConfig::validate() const {
  constants.validate();
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorKind::kInvalidArgument, what);
  };
  require(noise_sigma >= 0.0, "noise must be >= 0");
  require(rate >= 50.0 && rate <= 500.0, "rate must lie in [50, 500] Hz");
  require(logo_rate >= 50.0 && logo_rate <= 500.0, "logo_rate must lie in [50, 500] Hz");
  require(miss_prob >= 0.0 && miss_prob < 1.0, "miss_prob must lie in [0, 1)");
  require(jobs >= 1, "jobs must be >= 1");
  require(fit.window == 0 || fit.window >= 5, "fit_window must be 0 (whole segment) or >= 5");
  require(fit.min_points >= 5, "min_points must be >= 5");
  require(fit.outliers.threshold > 0.0, "outlier_threshold must be > 0");
  require(n_per_setting >= 2, "n_per_setting must be >= 2");
  require(prefix_fraction > 0.0 && prefix_fraction <= 1.0, "prefix_fraction must lie in (0, 1]");
  require(logo.geometry.logo_radius > 0.0 && logo.geometry.logo_radius < constants.radius,
          "logo_radius must lie in (0, radius)");
  require(logo.plane.circle_weight >= 0.0, "circle_weight must be >= 0");
  require(min_cluster_accuracy >= 0.0 && min_cluster_accuracy <= 1.0,
          "min_cluster_accuracy must lie in [0, 1]");
  require(max_topspin_high_ratio > 0.0, "max_topspin_high_ratio must be > 0");
}

eval::BenchmarkConfig RunConfig::benchmark() const {
  eval::BenchmarkConfig b;
  b.n_per_setting = n_per_setting;
  b.noise_sigma = noise_sigma;
  b.rate = rate;
  b.prefix_fraction = prefix_fraction;
  b.seed = seed;
  b.jobs = jobs;
  b.constants = constants;
  b.fit = fit;
  b.variation = variation;
  return b;
}

void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) {
    throw Error(ErrorKind::kInvalidArgument, "unknown config key '" + std::string(key) + "'");
  }
  it->second(cfg, key, value);
  if (key == "radius") cfg.logo.geometry.ball_radius = cfg.constants.radius;
}

void load_config(RunConfig& cfg, std::istream& in) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ParseError(number, "expected 'key = value'");
    try {
      apply_setting(cfg, trim(std::string_view(body).substr(0, eq)),
                    trim(std::string_view(body).substr(eq + 1)));
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(number, e.what());
    }
  }
}

void load_config(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open config '" + path.string() + "'");
  load_config(cfg, in);
}

}  // namespace spinest
