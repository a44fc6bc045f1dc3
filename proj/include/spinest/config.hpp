#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "spinest/eval.hpp"
#include "spinest/logo_spin.hpp"
#include "spinest/magnus_fit.hpp"
#include "spinest/physics.hpp"

namespace spinest {

/// Settings shared by every CLI command. Loaded from a `key = value` text
/// file (`#` starts a comment); command-line flags override file values.
struct RunConfig {
  physics::PhysicalConstants constants;
  double noise_sigma = 0.002;  // m
  double rate = 380.0;         // trajectory observation rate, Hz
  double logo_rate = 380.0;    // logo camera rate, Hz
  double miss_prob = 0.0;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  std::filesystem::path out_dir = ".";

  magnus::FitConfig fit;
  logo::LogoConfig logo;

  std::size_t n_per_setting = 50;
  double prefix_fraction = 0.6;
  eval::Variation variation;

  // Pass thresholds of `evaluate`.
  double min_cluster_accuracy = 0.85;
  double max_topspin_high_ratio = 1.0 / 3.0;

  /// Throws Error(kInvalidArgument) when a value breaks a module precondition.
  void validate() const;

  eval::BenchmarkConfig benchmark() const;
};

/// Sets one key. Throws Error(kInvalidArgument) for unknown keys or values
/// that do not parse.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);

/// Parses `key = value` lines; errors carry the line number.
void load_config(RunConfig& cfg, std::istream& in);
void load_config(RunConfig& cfg, const std::filesystem::path& path);

}  // namespace spinest
