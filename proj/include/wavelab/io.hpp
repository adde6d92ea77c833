#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "wavelab/grid.hpp"

namespace wavelab {

/// Decimal form of x that parses back to exactly x (printf %.17g). All CSV
/// cells go through this so identical runs serialize to identical bytes.
std::string format_double(double x);

/// One CSV artifact: '#'-prefixed comment lines carrying the resolved run
/// configuration and the operations the columns came from, a header row,
/// then string cells row by row.
struct CsvTable {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Serializes the table; throws ResourceError when the file cannot be
/// opened and DomainError on ragged rows.
void write_csv(const std::filesystem::path& path, const CsvTable& table);

void write_text_file(const std::filesystem::path& path, const std::string& content);

/// Flat binary snapshot of a state pair. Little-endian layout:
///   bytes 0-7   magic "WAVEFLD1"
///   int32       grid kind (0 full, 1 radial)
///   int32       dimension n
///   int32       points per axis
///   int32       reserved, 0
///   float64     extent
///   float64     time
///   float64[node_count]  u, row-major over the index box
///   float64[node_count]  v, row-major over the index box
void write_field_snapshot(const std::filesystem::path& path, const GridSpec& grid,
                          const StatePair& state);

/// Reads a snapshot back; fills grid_out with the stored geometry (dt and
/// boundary are not stored and keep their defaults). Throws DomainError on a
/// malformed file, ResourceError when it cannot be read.
StatePair read_field_snapshot(const std::filesystem::path& path, GridSpec& grid_out);

}  // namespace wavelab
