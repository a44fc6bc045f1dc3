// spinest: simulate flights, estimate spin and run the synthetic benchmark.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "spinest/config.hpp"
#include "spinest/error.hpp"
#include "spinest/eval.hpp"
#include "spinest/io.hpp"
#include "spinest/logo_spin.hpp"
#include "spinest/magnus_fit.hpp"
#include "spinest/physics.hpp"

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using spinest::Error;
using spinest::ErrorKind;
using spinest::RunConfig;
using Vec3 = Eigen::Vector3d;

enum Exit : int { kOk = 0, kInputError = 1, kEstimationError = 2, kAcceptanceFailure = 3 };

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kContractViolation:
    case ErrorKind::kParse:
    case ErrorKind::kIo:
      return kInputError;
    default:
      return kEstimationError;
  }
}

json num(double v) { return spinest::io::round9(v); }

json vec(const Vec3& v) { return json::array({num(v.x()), num(v.y()), num(v.z())}); }

Vec3 to_vec3(const std::vector<double>& v) { return {v[0], v[1], v[2]}; }

// Flags shared by every subcommand. Values from --config are applied first,
// then --set pairs, then the dedicated flags.
struct CommonFlags {
  std::uint64_t seed = 0;
  double rate = 0.0;
  double noise = 0.0;
  std::size_t jobs = 0;
  std::string config;
  std::string out;
  std::vector<std::string> sets;

  CLI::Option* seed_opt = nullptr;
  CLI::Option* rate_opt = nullptr;
  CLI::Option* noise_opt = nullptr;
  CLI::Option* jobs_opt = nullptr;
  CLI::Option* config_opt = nullptr;
  CLI::Option* out_opt = nullptr;

  void attach(CLI::App* app) {
    seed_opt = app->add_option("--seed", seed, "RNG seed");
    rate_opt = app->add_option("--rate", rate, "trajectory camera rate (Hz)");
    noise_opt = app->add_option("--noise", noise, "position noise sigma (m)");
    jobs_opt = app->add_option("--jobs", jobs, "worker threads");
    config_opt = app->add_option("--config", config, "key = value configuration file");
    out_opt = app->add_option("--out", out, "output directory");
    app->add_option("--set", sets, "override one config key (key=value), repeatable");
  }

  RunConfig resolve() const {
    RunConfig cfg;
    if (config_opt->count() > 0) spinest::load_config(cfg, fs::path(config));
    for (const std::string& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        throw Error(ErrorKind::kInvalidArgument, "--set expects key=value, got '" + kv + "'");
      }
      spinest::apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (seed_opt->count() > 0) cfg.seed = seed;
    if (rate_opt->count() > 0) cfg.rate = rate;
    if (noise_opt->count() > 0) cfg.noise_sigma = noise;
    if (jobs_opt->count() > 0) cfg.jobs = jobs;
    if (out_opt->count() > 0) cfg.out_dir = out;
    cfg.validate();
    return cfg;
  }
};

std::ofstream open_output(const fs::path& dir, const std::string& name) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write '" + (dir / name).string() + "'");
  return out;
}

void write_file(const fs::path& dir, const std::string& name, const std::string& text) {
  std::ofstream out = open_output(dir, name);
  out << text;
  if (!out) throw Error(ErrorKind::kIo, "failed writing '" + (dir / name).string() + "'");
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string setting;
  std::vector<double> omega;
  std::vector<double> position{-1.5, 0.0, 0.30};
  std::vector<double> velocity{5.0, 0.0, 1.5};
  std::vector<double> orientation{1.0, 0.0, 0.0, 0.0};
  double duration = 0.0;
  double logo_duration = 0.1;
  double radius_px = 40.0;
  bool contour = false;

  CLI::Option* position_opt = nullptr;
  CLI::Option* velocity_opt = nullptr;
  CLI::Option* duration_opt = nullptr;
};

int cmd_simulate(const CommonFlags& flags, const SimulateArgs& args) {
  const RunConfig cfg = flags.resolve();
  namespace phys = spinest::physics;

  phys::BallState launch;
  phys::SpinVector spin;
  json setting_name = nullptr;
  if (!args.setting.empty()) {
    if (!args.omega.empty()) {
      throw Error(ErrorKind::kInvalidArgument, "give either --setting or --omega, not both");
    }
    const spinest::eval::SpinSetting s = spinest::eval::find_setting(args.setting);
    launch = s.launch;
    spin = s.omega;
    setting_name = s.name;
  } else if (!args.omega.empty()) {
    spin.omega = to_vec3(args.omega);
    launch.position = to_vec3(args.position);
    launch.velocity = to_vec3(args.velocity);
  } else {
    throw Error(ErrorKind::kInvalidArgument, "simulate needs --setting or --omega");
  }
  if (args.position_opt->count() > 0) launch.position = to_vec3(args.position);
  if (args.velocity_opt->count() > 0) launch.velocity = to_vec3(args.velocity);

  phys::ObservationConfig obs_cfg;
  obs_cfg.rate = cfg.rate;
  obs_cfg.noise_sigma = cfg.noise_sigma;
  obs_cfg.seed = cfg.seed;
  if (args.duration_opt->count() > 0) obs_cfg.duration = args.duration;
  const phys::Trajectory traj = phys::simulate_observations(launch, spin, cfg.constants, obs_cfg);
  const auto bounce = phys::bounce_point(launch, spin, cfg.constants);

  phys::LogoSimConfig logo_cfg;
  logo_cfg.rate = cfg.logo_rate;
  logo_cfg.t_end = args.logo_duration;
  logo_cfg.miss_prob = cfg.miss_prob;
  logo_cfg.seed = cfg.seed ^ 0x6c6f676fULL;
  const spinest::rotmath::Quat q0(args.orientation[0], args.orientation[1],
                                  args.orientation[2], args.orientation[3]);
  const std::vector<phys::LogoObservation> logo = phys::simulate_logo(q0, spin, logo_cfg);

  std::ostringstream traj_csv, logo_csv;
  spinest::io::write_trajectory_csv(traj_csv, traj);
  spinest::io::write_logo_csv(logo_csv, logo);
  write_file(cfg.out_dir, "trajectory.csv", traj_csv.str());
  write_file(cfg.out_dir, "logo.csv", logo_csv.str());

  if (args.contour) {
    std::vector<spinest::logo::LogoFrame> frames;
    frames.reserve(logo.size());
    for (const auto& o : logo) {
      spinest::logo::LogoFrame f;
      f.t = o.t;
      f.radius_px = args.radius_px;
      if (o.visible) {
        f.contour = spinest::logo::render_contour(o.direction, args.radius_px, cfg.logo.geometry);
      }
      frames.push_back(std::move(f));
    }
    std::ostringstream contour_csv;
    spinest::io::write_contour_csv(contour_csv, frames);
    write_file(cfg.out_dir, "contour.csv", contour_csv.str());
  }

  json truth;
  truth["setting"] = setting_name;
  truth["omega"] = vec(spin.omega);
  truth["initial_state"] = {{"t", num(launch.t)},
                            {"position", vec(launch.position)},
                            {"velocity", vec(launch.velocity)}};
  truth["initial_orientation"] = {num(q0.w()), num(q0.x()), num(q0.y()), num(q0.z())};
  if (bounce) {
    truth["bounce"] = {{"position", vec(bounce->position)}, {"t", num(bounce->t)}};
  } else {
    truth["bounce"] = nullptr;
  }
  truth["seed"] = cfg.seed;
  truth["rate"] = num(cfg.rate);
  truth["logo_rate"] = num(cfg.logo_rate);
  truth["noise"] = num(cfg.noise_sigma);
  truth["n_trajectory"] = traj.size();
  truth["n_logo"] = logo.size();
  write_file(cfg.out_dir, "truth.json", truth.dump(2) + "\n");

  std::cout << "wrote " << traj.size() << " trajectory rows, " << logo.size()
            << " logo rows to " << cfg.out_dir.string() << "\n";
  return kOk;
}

// ------------------------------------------------------- fit-spin, logo-spin

int cmd_fit_spin(const CommonFlags& flags, const std::string& path) {
  const RunConfig cfg = flags.resolve();
  const spinest::physics::Trajectory traj = spinest::io::read_trajectory_csv(fs::path(path));
  const auto est = spinest::magnus::estimate_spin(traj, cfg.constants, cfg.fit);
  std::cout << spinest::io::spin_estimate_json(est) << "\n";
  return kOk;
}

// Contours are reduced to one logo centre per frame first; `observations_path`
// optionally receives those centres as a logo CSV.
int cmd_logo_spin(const CommonFlags& flags, const std::string& path,
                  const std::string& observations_path) {
  const RunConfig cfg = flags.resolve();
  std::vector<spinest::physics::LogoObservation> obs;
  if (spinest::io::is_contour_csv(fs::path(path))) {
    for (const auto& frame : spinest::io::read_contour_csv(fs::path(path))) {
      obs.push_back(spinest::logo::observe_logo(frame, cfg.logo));
    }
  } else {
    obs = spinest::io::read_logo_csv(fs::path(path));
  }
  if (!observations_path.empty()) {
    std::ofstream out(observations_path);
    if (out) spinest::io::write_logo_csv(out, obs);
    if (!out) throw Error(ErrorKind::kIo, "cannot write '" + observations_path + "'");
  }
  const auto est = spinest::logo::estimate_spin_logo(
      std::span<const spinest::physics::LogoObservation>(obs), cfg.logo);
  std::cout << spinest::io::spin_estimate_json(est) << "\n";
  return kOk;
}

// ---------------------------------------------------------------- evaluate

struct ClusterRow {
  std::string setting;
  std::size_t shots = 0;
  std::size_t estimated = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;  // correct / shots; failed estimates count as misses
  std::optional<Vec3> center;
};

struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

std::string fmt(const char* pattern, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), pattern, args...);
  return buf;
}

int cmd_evaluate(const CommonFlags& flags) {
  const RunConfig cfg = flags.resolve();
  namespace ev = spinest::eval;
  using spinest::io::format_number;

  const std::vector<ev::SpinSetting> settings = ev::make_settings();
  const ev::BenchmarkResult bench = ev::bounce_benchmark(settings, cfg.benchmark());

  // Clustering over the settings with enough whole-flight estimates; the rest
  // score zero.
  const std::vector<ev::LabeledEstimates> groups = ev::flight_estimates(bench);
  std::vector<ev::LabeledEstimates> usable;
  for (const auto& g : groups) {
    if (g.omegas.size() >= 2) usable.push_back(g);
  }
  std::vector<ClusterRow> cluster(settings.size());
  for (std::size_t s = 0; s < settings.size(); ++s) {
    cluster[s].setting = settings[s].name;
    cluster[s].shots = cfg.n_per_setting;
    for (const auto& g : groups) {
      if (g.setting == settings[s].name) cluster[s].estimated = g.omegas.size();
    }
  }
  bool degenerate = false;
  if (!usable.empty()) {
    const ev::ClusterReport rep = ev::cluster_classify(usable);
    degenerate = rep.degenerate;
    for (std::size_t g = 0; g < rep.settings.size(); ++g) {
      for (ClusterRow& row : cluster) {
        if (row.setting == rep.settings[g]) {
          row.correct = rep.correct[g];
          row.center = rep.centers[g];
        }
      }
    }
  }
  std::size_t total_correct = 0, total_shots = 0;
  for (ClusterRow& row : cluster) {
    row.accuracy = static_cast<double>(row.correct) / static_cast<double>(row.shots);
    total_correct += row.correct;
    total_shots += row.shots;
  }
  const double total_accuracy =
      static_cast<double>(total_correct) / static_cast<double>(total_shots);

  // Acceptance properties.
  std::vector<Check> checks;
  std::size_t beaten = 0;
  for (const ev::BounceRow& row : bench.rows) {
    if (row.used > 0 && row.fitted_mean_mm < row.nospin_mean_mm) ++beaten;
  }
  checks.push_back({"fitted_beats_nospin_settings", static_cast<double>(beaten),
                    static_cast<double>(bench.rows.size()), beaten == bench.rows.size()});
  double ratio = std::numeric_limits<double>::infinity();
  for (const ev::BounceRow& row : bench.rows) {
    if (row.setting == "topspin:high" && row.used > 0 && row.nospin_mean_mm > 0.0) {
      ratio = row.fitted_mean_mm / row.nospin_mean_mm;
    }
  }
  checks.push_back({"topspin_high_ratio", ratio, cfg.max_topspin_high_ratio,
                    ratio < cfg.max_topspin_high_ratio});
  checks.push_back({"cluster_total_accuracy", total_accuracy, cfg.min_cluster_accuracy,
                    total_accuracy >= cfg.min_cluster_accuracy});
  const bool pass = std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });

  // Tables.
  std::ostringstream bounce_csv, bounce_txt, cluster_csv, cluster_txt;
  bounce_csv << "setting,fitted_mean_mm,fitted_std_mm,nospin_mean_mm,nospin_std_mm,used,excluded,"
                "fitted_wins\n";
  bounce_txt << fmt("%-16s %22s %22s %5s %5s %5s\n", "setting", "fitted spin (mm)",
                    "no spin (mm)", "used", "excl", "wins");
  for (const ev::BounceRow& r : bench.rows) {
    bounce_csv << r.setting << ',' << format_number(r.fitted_mean_mm) << ','
               << format_number(r.fitted_std_mm) << ',' << format_number(r.nospin_mean_mm) << ','
               << format_number(r.nospin_std_mm) << ',' << r.used << ',' << r.excluded << ','
               << r.fitted_wins << '\n';
    bounce_txt << fmt("%-16s %10.2f +- %8.2f %10.2f +- %8.2f %5zu %5zu %5zu\n", r.setting.c_str(),
                      r.fitted_mean_mm, r.fitted_std_mm, r.nospin_mean_mm, r.nospin_std_mm, r.used,
                      r.excluded, r.fitted_wins);
  }
  cluster_csv << "setting,shots,estimated,correct,accuracy,center_x,center_y,center_z\n";
  cluster_txt << fmt("%-16s %6s %6s %6s %9s %28s\n", "setting", "shots", "est", "ok", "accuracy",
                     "median spin (rad/s)");
  for (const ClusterRow& r : cluster) {
    const Vec3 c = r.center.value_or(Vec3::Constant(std::numeric_limits<double>::quiet_NaN()));
    cluster_csv << r.setting << ',' << r.shots << ',' << r.estimated << ',' << r.correct << ','
                << format_number(r.accuracy);
    for (int a = 0; a < 3; ++a) cluster_csv << ',' << (r.center ? format_number(c[a]) : "");
    cluster_csv << '\n';
    cluster_txt << fmt("%-16s %6zu %6zu %6zu %8.1f%% %9.1f %9.1f %9.1f\n", r.setting.c_str(),
                       r.shots, r.estimated, r.correct, 100.0 * r.accuracy, c.x(), c.y(), c.z());
  }
  cluster_csv << "total," << total_shots << ",," << total_correct << ','
              << format_number(total_accuracy) << ",,,\n";
  cluster_txt << fmt("%-16s %6zu %6s %6zu %8.1f%%\n", "total", total_shots, "", total_correct,
                     100.0 * total_accuracy);

  std::ostringstream checks_txt;
  for (const Check& c : checks) {
    checks_txt << fmt("%-30s %12.6g  threshold %10.6g  %s\n", c.name.c_str(), c.value, c.threshold,
                      c.pass ? "PASS" : "FAIL");
  }

  // JSON report with the per-shot records. Thread count is left out so the
  // bytes do not depend on --jobs.
  json report;
  report["config"] = {{"seed", cfg.seed},
                      {"noise", num(cfg.noise_sigma)},
                      {"rate", num(cfg.rate)},
                      {"n_per_setting", cfg.n_per_setting},
                      {"prefix_fraction", num(cfg.prefix_fraction)},
                      {"fit_window", cfg.fit.window}};
  json rows = json::array();
  for (const ev::BounceRow& r : bench.rows) {
    rows.push_back({{"setting", r.setting},
                    {"fitted_mean_mm", num(r.fitted_mean_mm)},
                    {"fitted_std_mm", num(r.fitted_std_mm)},
                    {"nospin_mean_mm", num(r.nospin_mean_mm)},
                    {"nospin_std_mm", num(r.nospin_std_mm)},
                    {"used", r.used},
                    {"excluded", r.excluded},
                    {"fitted_wins", r.fitted_wins}});
  }
  report["bounce"] = rows;
  json crows = json::array();
  for (const ClusterRow& r : cluster) {
    crows.push_back({{"setting", r.setting},
                     {"shots", r.shots},
                     {"estimated", r.estimated},
                     {"correct", r.correct},
                     {"accuracy", num(r.accuracy)},
                     {"center", r.center ? vec(*r.center) : json(nullptr)}});
  }
  report["clustering"] = {{"settings", crows},
                          {"total_accuracy", num(total_accuracy)},
                          {"degenerate", degenerate}};
  json jchecks = json::array();
  for (const Check& c : checks) {
    jchecks.push_back({{"name", c.name},
                       {"value", std::isfinite(c.value) ? num(c.value) : json(nullptr)},
                       {"threshold", num(c.threshold)},
                       {"pass", c.pass}});
  }
  report["checks"] = jchecks;
  report["pass"] = pass;
  json records = json::array();
  auto opt_vec = [](const std::optional<Vec3>& v) { return v ? vec(*v) : json(nullptr); };
  for (const ev::ShotRecord& r : bench.records) {
    records.push_back({{"setting", r.setting},
                       {"index", r.index},
                       {"seed", r.seed},
                       {"true_omega", vec(r.true_omega)},
                       {"true_bounce", vec(r.true_bounce)},
                       {"flight_omega", opt_vec(r.flight_omega)},
                       {"prefix_omega", opt_vec(r.prefix_omega)},
                       {"fitted_bounce", opt_vec(r.fitted_bounce)},
                       {"nospin_bounce", opt_vec(r.nospin_bounce)},
                       {"fitted_error_mm", r.excluded ? json(nullptr) : num(r.fitted_error_mm)},
                       {"nospin_error_mm", r.excluded ? json(nullptr) : num(r.nospin_error_mm)},
                       {"excluded", r.excluded},
                       {"reason", r.reason}});
  }
  report["records"] = records;

  write_file(cfg.out_dir, "bounce_table.csv", bounce_csv.str());
  write_file(cfg.out_dir, "bounce_table.txt", bounce_txt.str());
  write_file(cfg.out_dir, "cluster_table.csv", cluster_csv.str());
  write_file(cfg.out_dir, "cluster_table.txt", cluster_txt.str());
  write_file(cfg.out_dir, "report.json", report.dump(2) + "\n");

  std::cout << "Bounce prediction error (synthetic settings, " << cfg.n_per_setting
            << " shots each)\n"
            << bounce_txt.str() << "\nClustering accuracy\n"
            << cluster_txt.str() << "\n"
            << checks_txt.str() << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? kOk : kAcceptanceFailure;
}

void report_error(const Error& e) {
  json j;
  j["error"] = std::string(spinest::to_string(e.kind()));
  j["message"] = e.what();
  if (const auto* pe = dynamic_cast<const spinest::ParseError*>(&e)) j["line"] = pe->line();
  std::cout << j.dump(2) << "\n";
  std::cerr << "spinest: " << spinest::to_string(e.kind()) << ": " << e.what() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Table tennis spin estimation from trajectories and logo tracks"};
  app.require_subcommand(1);

  CommonFlags sim_flags, fit_flags, logo_flags, eval_flags;
  SimulateArgs sim;
  std::string fit_path, logo_path, observations_path;

  CLI::App* simulate = app.add_subcommand(
      "simulate", "write trajectory.csv, logo.csv and truth.json for one flight");
  sim_flags.attach(simulate);
  simulate->add_option("--setting", sim.setting, "catalogue setting, e.g. topspin:high");
  simulate->add_option("--omega", sim.omega, "spin vector x,y,z (rad/s)")
      ->delimiter(',')
      ->expected(3);
  sim.position_opt = simulate->add_option("--position", sim.position, "launch position x,y,z (m)")
                         ->delimiter(',')
                         ->expected(3);
  sim.velocity_opt = simulate->add_option("--velocity", sim.velocity, "launch velocity x,y,z (m/s)")
                         ->delimiter(',')
                         ->expected(3);
  simulate->add_option("--orientation", sim.orientation, "initial ball orientation w,x,y,z")
      ->delimiter(',')
      ->expected(4);
  sim.duration_opt = simulate->add_option(
      "--duration", sim.duration, "sample this long (s) instead of stopping at the bounce");
  simulate->add_option("--logo-duration", sim.logo_duration, "logo track length (s)");
  simulate->add_flag("--contour", sim.contour, "also write contour.csv");
  simulate->add_option("--radius-px", sim.radius_px, "ball radius in pixels for contour.csv");

  CLI::App* fit = app.add_subcommand("fit-spin", "estimate spin from a trajectory CSV");
  fit_flags.attach(fit);
  fit->add_option("file", fit_path, "trajectory CSV (t,x,y,z)")->required();

  CLI::App* logo = app.add_subcommand("logo-spin", "estimate spin from a logo or contour CSV");
  logo_flags.attach(logo);
  logo->add_option("file", logo_path, "logo CSV (t,visible,lx,ly,lz) or contour CSV")->required();
  logo->add_option("--observations", observations_path,
                   "also write the per-frame logo centres as a logo CSV");

  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "bounce-prediction and clustering benchmark on the synthetic settings");
  eval_flags.attach(evaluate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kInputError;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim_flags, sim);
    if (fit->parsed()) return cmd_fit_spin(fit_flags, fit_path);
    if (logo->parsed()) return cmd_logo_spin(logo_flags, logo_path, observations_path);
    if (evaluate->parsed()) return cmd_evaluate(eval_flags);
  } catch (const Error& e) {
    report_error(e);
    // Every failure of simulate stems from its inputs.
    return simulate->parsed() ? kInputError : exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "spinest: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
