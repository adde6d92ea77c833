#include "wavelab/io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace wavelab {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  for (const auto& row : table.rows)
    if (row.size() != table.header.size())
      throw DomainError("write_csv: row width does not match the header");

  std::string out;
  for (const auto& c : table.comments) out += "# " + c + "\n";
  auto join = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  join(table.header);
  for (const auto& row : table.rows) join(row);
  write_text_file(path, out);
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ResourceError("cannot open for writing: " + path.string());
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f) throw ResourceError("short write: " + path.string());
}

namespace {

constexpr char snapshot_magic[8] = {'W', 'A', 'V', 'E', 'F', 'L', 'D', '1'};

}  // namespace

void write_field_snapshot(const std::filesystem::path& path, const GridSpec& grid,
                          const StatePair& state) {
  grid.check();
  const std::size_t count = grid.node_count();
  if (state.u.size() != static_cast<Eigen::Index>(count) || state.u.size() != state.v.size())
    throw DomainError("write_field_snapshot: state size does not match the grid");

  std::ofstream f(path, std::ios::binary);
  if (!f) throw ResourceError("cannot open for writing: " + path.string());

  const std::int32_t header[4] = {grid.kind == GridKind::Full ? 0 : 1,
                                  static_cast<std::int32_t>(grid.n),
                                  static_cast<std::int32_t>(grid.points_per_axis), 0};
  const double scalars[2] = {grid.extent, state.time};
  f.write(snapshot_magic, sizeof snapshot_magic);
  f.write(reinterpret_cast<const char*>(header), sizeof header);
  f.write(reinterpret_cast<const char*>(scalars), sizeof scalars);
  f.write(reinterpret_cast<const char*>(state.u.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  f.write(reinterpret_cast<const char*>(state.v.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!f) throw ResourceError("short write: " + path.string());
}

StatePair read_field_snapshot(const std::filesystem::path& path, GridSpec& grid_out) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ResourceError("cannot open for reading: " + path.string());

  char magic[8];
  std::int32_t header[4];
  double scalars[2];
  f.read(magic, sizeof magic);
  f.read(reinterpret_cast<char*>(header), sizeof header);
  f.read(reinterpret_cast<char*>(scalars), sizeof scalars);
  if (!f || std::memcmp(magic, snapshot_magic, sizeof magic) != 0)
    throw DomainError("read_field_snapshot: not a field snapshot: " + path.string());

  GridSpec g;
  g.kind = header[0] == 0 ? GridKind::Full : GridKind::Radial;
  g.n = header[1];
  g.points_per_axis = header[2];
  g.extent = scalars[0];
  g.check();

  StatePair state;
  state.time = scalars[1];
  const std::size_t count = g.node_count();
  state.u.resize(static_cast<Eigen::Index>(count));
  state.v.resize(static_cast<Eigen::Index>(count));
  f.read(reinterpret_cast<char*>(state.u.data()),
         static_cast<std::streamsize>(count * sizeof(double)));
  f.read(reinterpret_cast<char*>(state.v.data()),
         static_cast<std::streamsize>(count * sizeof(double)));
  if (!f) throw DomainError("read_field_snapshot: truncated payload: " + path.string());
  grid_out = g;
  return state;
}

}  // namespace wavelab
