#include "spinest/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "spinest/error.hpp"

namespace spinest::io {

namespace {

using physics::BallObservation;
using physics::LogoObservation;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_number(const std::string& field, std::size_t line) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (field.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw ParseError(line, "not a finite number: '" + field + "'");
  }
  return v;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path.string() + "'");
  return in;
}

// Reads the header and the non-blank data lines, remembering line numbers.
struct CsvLines {
  std::vector<std::string> header;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
};

CsvLines read_lines(std::istream& in) {
  CsvLines out;
  std::string line;
  std::size_t number = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    if (!have_header) {
      out.header = split(line);
      have_header = true;
    } else {
      out.rows.emplace_back(number, split(line));
    }
  }
  if (!have_header) throw ParseError(1, "missing header");
  return out;
}

void expect_header(const CsvLines& csv, const std::vector<std::string>& expected) {
  if (csv.header != expected) {
    std::string want;
    for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
    throw ParseError(1, "expected header '" + want + "'");
  }
}

}  // namespace

std::string format_number(double v) {
  if (v == 0.0) return "0";  // also folds -0
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 9);
  return std::string(buf, res.ptr);
}

double round9(double v) {
  const std::string s = format_number(v);
  double out = 0.0;
  std::from_chars(s.data(), s.data() + s.size(), out);
  return out;
}

physics::Trajectory read_trajectory_csv(std::istream& in) {
  const CsvLines csv = read_lines(in);
  expect_header(csv, {"t", "x", "y", "z"});
  std::vector<BallObservation> obs;
  obs.reserve(csv.rows.size());
  for (const auto& [line, f] : csv.rows) {
    if (f.size() != 4) throw ParseError(line, "expected 4 fields");
    BallObservation o;
    o.t = parse_number(f[0], line);
    o.position = {parse_number(f[1], line), parse_number(f[2], line), parse_number(f[3], line)};
    if (!obs.empty() && !(o.t > obs.back().t)) {
      throw ParseError(line, "timestamps must be strictly increasing");
    }
    obs.push_back(o);
  }
  if (obs.size() < 2) {
    throw ParseError(csv.rows.empty() ? 1 : csv.rows.back().first,
                     "trajectory needs at least 2 rows");
  }
  return physics::Trajectory(std::move(obs));
}

physics::Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  return read_trajectory_csv(in);
}

void write_trajectory_csv(std::ostream& out, const physics::Trajectory& traj) {
  out << "t,x,y,z\n";
  for (const BallObservation& o : traj) {
    out << format_number(o.t) << ',' << format_number(o.position.x()) << ','
        << format_number(o.position.y()) << ',' << format_number(o.position.z()) << '\n';
  }
}

std::vector<LogoObservation> read_logo_csv(std::istream& in) {
  const CsvLines csv = read_lines(in);
  expect_header(csv, {"t", "visible", "lx", "ly", "lz"});
  std::vector<LogoObservation> out;
  out.reserve(csv.rows.size());
  for (const auto& [line, f] : csv.rows) {
    if (f.size() != 5) throw ParseError(line, "expected 5 fields");
    LogoObservation o;
    o.t = parse_number(f[0], line);
    if (f[1] != "0" && f[1] != "1") throw ParseError(line, "visible must be 0 or 1");
    o.visible = f[1] == "1";
    const physics::Vec3 d(parse_number(f[2], line), parse_number(f[3], line),
                          parse_number(f[4], line));
    if (!out.empty() && !(o.t > out.back().t)) {
      throw ParseError(line, "timestamps must be strictly increasing");
    }
    if (o.visible) {
      if (std::abs(d.norm() - 1.0) > 1e-6) {
        throw ParseError(line, "visible logo direction is not a unit vector");
      }
      o.direction = d.normalized();
    }
    out.push_back(o);
  }
  return out;
}

std::vector<LogoObservation> read_logo_csv(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  return read_logo_csv(in);
}

void write_logo_csv(std::ostream& out, std::span<const LogoObservation> obs) {
  out << "t,visible,lx,ly,lz\n";
  for (const LogoObservation& o : obs) {
    const physics::Vec3 d = o.visible ? o.direction : physics::Vec3::Zero();
    out << format_number(o.t) << ',' << (o.visible ? 1 : 0) << ',' << format_number(d.x())
        << ',' << format_number(d.y()) << ',' << format_number(d.z()) << '\n';
  }
}

std::vector<logo::LogoFrame> read_contour_csv(std::istream& in) {
  const CsvLines csv = read_lines(in);
  if (csv.header.size() < 2 || csv.header[0] != "t" || csv.header[1] != "radius_px") {
    throw ParseError(1, "expected header starting 't,radius_px'");
  }
  std::vector<logo::LogoFrame> out;
  out.reserve(csv.rows.size());
  for (const auto& [line, raw] : csv.rows) {
    std::vector<std::string> f = raw;
    // Rows padded to a common width may carry empty trailing fields.
    while (f.size() > 2 && f.back().empty()) f.pop_back();
    if (f.size() < 2 || f.size() % 2 != 0) {
      throw ParseError(line, "expected t, radius_px and (u, v) pairs");
    }
    logo::LogoFrame fr;
    fr.t = parse_number(f[0], line);
    fr.radius_px = parse_number(f[1], line);
    if (!(fr.radius_px > 0.0)) throw ParseError(line, "radius_px must be positive");
    if (!out.empty() && !(fr.t > out.back().t)) {
      throw ParseError(line, "timestamps must be strictly increasing");
    }
    for (std::size_t i = 2; i < f.size(); i += 2) {
      fr.contour.push_back({parse_number(f[i], line), parse_number(f[i + 1], line)});
    }
    out.push_back(std::move(fr));
  }
  return out;
}

std::vector<logo::LogoFrame> read_contour_csv(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  return read_contour_csv(in);
}

void write_contour_csv(std::ostream& out, std::span<const logo::LogoFrame> frames) {
  std::size_t widest = 0;
  for (const auto& f : frames) widest = std::max(widest, f.contour.size());
  out << "t,radius_px";
  for (std::size_t i = 1; i <= widest; ++i) out << ",u" << i << ",v" << i;
  out << '\n';
  for (const auto& f : frames) {
    out << format_number(f.t) << ',' << format_number(f.radius_px);
    for (const auto& px : f.contour) out << ',' << format_number(px.u) << ',' << format_number(px.v);
    out << '\n';
  }
}

bool is_contour_csv(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto f = split(line);
    return f.size() >= 2 && f[0] == "t" && f[1] == "radius_px";
  }
  return false;
}

std::string spin_estimate_json(const magnus::SpinEstimate& est) {
  nlohmann::ordered_json j;
  const auto& w = est.omega.omega;
  j["omega"] = {round9(w.x()), round9(w.y()), round9(w.z())};
  j["rms_residual"] = round9(est.rms_residual);
  j["condition_number"] = round9(est.condition_number);
  j["n_points"] = est.n_points;
  j["method"] = std::string(magnus::to_string(est.method));
  j["low_confidence"] = est.low_confidence;
  return j.dump(2);
}

std::string error_json(std::string_view kind, std::string_view message) {
  nlohmann::ordered_json j;
  j["error"] = std::string(kind);
  j["message"] = std::string(message);
  return j.dump(2);
}

}  // namespace spinest::io
