#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "spinest/logo_spin.hpp"
#include "spinest/magnus_fit.hpp"
#include "spinest/physics.hpp"

namespace spinest::io {

/// Decimal text with 9 significant digits, independent of the C++ locale.
std::string format_number(double v);

/// The double nearest to format_number(v); serializing it again (including
/// through a shortest-round-trip JSON writer) yields at most 9 significant
/// digits.
double round9(double v);

// Trajectory CSV: header `t,x,y,z`, SI units, one observation per row.
physics::Trajectory read_trajectory_csv(std::istream& in);
physics::Trajectory read_trajectory_csv(const std::filesystem::path& path);
void write_trajectory_csv(std::ostream& out, const physics::Trajectory& traj);

// Logo CSV: header `t,visible,lx,ly,lz`; visible is 0 or 1 and the direction
// is all-zero on invisible rows.
std::vector<physics::LogoObservation> read_logo_csv(std::istream& in);
std::vector<physics::LogoObservation> read_logo_csv(const std::filesystem::path& path);
void write_logo_csv(std::ostream& out, std::span<const physics::LogoObservation> obs);

// Contour CSV: header starting `t,radius_px`, then variable-length rows
// `t,radius_px,u1,v1,u2,v2,...`. A row without pixels is a frame with no
// detected logo.
std::vector<logo::LogoFrame> read_contour_csv(std::istream& in);
std::vector<logo::LogoFrame> read_contour_csv(const std::filesystem::path& path);
void write_contour_csv(std::ostream& out, std::span<const logo::LogoFrame> frames);

/// Sniffs the header line: true for contour files, false for logo files.
bool is_contour_csv(const std::filesystem::path& path);

/// `{omega: [x, y, z], rms_residual, condition_number, n_points, method}`
/// plus `low_confidence`, numbers at 9 significant digits.
std::string spin_estimate_json(const magnus::SpinEstimate& est);

/// `{error: "<kind>", message: "..."}`
std::string error_json(std::string_view kind, std::string_view message);

}  // namespace spinest::io
