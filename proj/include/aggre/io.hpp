#pragma once

// Files: observation CSV (header `t,m`), generic CSV tables, whole-file
// reads/writes, and a content hash for audit trails.

#include "aggre/forward.hpp"
#include "aggre/observation.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace aggre {

/// Parses `t,m` data. Blank lines and lines starting with '#' are skipped.
/// Rejects NaN/inf, negative m and non-increasing t with the offending line
/// number (ParseError).
ObservationSet parse_observations_csv(const std::string& text, const std::string& source = "<string>");
ObservationSet load_observations_csv(const std::filesystem::path& path);

/// Values are written with 17 significant digits so a reload is exact.
std::string format_observations_csv(const ObservationSet& obs);

std::string read_file(const std::filesystem::path& path);
/// Creates parent directories. Throws IoError naming the path on failure.
void write_file(const std::filesystem::path& path, const std::string& content);

/// Comma-separated table with a header row.
std::string format_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows);

/// Columns t, m, V, V_star (concentrations in mol/L).
std::string format_trajectory_csv(const Trajectory& traj);

/// 64-bit FNV-1a over the observation values as written by
/// format_observations_csv, rendered as 16 hex digits.
std::string data_hash(const ObservationSet& obs);
std::string fnv1a_hex(const std::string& bytes);

} // namespace aggre
