#pragma once

// File formats: region CSV/JSON/SVG, trace CSV, metrics JSON. All writers are
// deterministic (fixed formatting, no timestamps) and files are written to a
// temporary name and renamed into place.

#include <filesystem>
#include <string>

#include "mfcd/design.hpp"
#include "mfcd/simulate.hpp"

namespace mfcd {

/// Shortest round-trip decimal representation of a double.
std::string format_double(double v);

void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Header kp,kd,predicted,stable; one row per grid point.
std::string region_csv(const StabilityRegion& region);

/// Quadratic-form, line and crossover data of a region.
std::string region_summary_json(const StabilityRegion& region);

/// Columns t,y_ref,y,e,u and, for cascade traces, inner_ref,inner_y.
std::string trace_csv(const SimTrace& trace);
SimTrace trace_from_csv(const std::string& text);

std::string metrics_json(const Metrics& m);

/// Self-contained plot: grid points green (stable) / red (unstable), module
/// boundary in blue, phase line in black, simplified phase line in gray.
std::string region_svg(const StabilityRegion& region);

} // namespace mfcd
