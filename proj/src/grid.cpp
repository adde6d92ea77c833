#include "wavelab/grid.hpp"

#include <cmath>

namespace wavelab {

void GridSpec::check() const {
  if (kind == GridKind::Full) {
    if (n < 1 || n > 3) throw DomainError("GridSpec: full grids support n in {1, 2, 3}");
  } else {
    if (n < 3) throw DomainError("GridSpec: radial grids require n >= 3");
    if (boundary == Boundary::Periodic)
      throw ConfigError("GridSpec: radial grids have no periodic variant");
  }
  if (!(extent > 0.0)) throw DomainError("GridSpec: extent must be positive");
  if (points_per_axis < 3) throw DomainError("GridSpec: need at least 3 points per axis");
  if (dt < 0.0 || !std::isfinite(dt)) throw DomainError("GridSpec: dt must be >= 0 and finite");
}

double GridSpec::h() const {
  if (kind == GridKind::Radial) return extent / points_per_axis;
  if (boundary == Boundary::Periodic) return 2.0 * extent / points_per_axis;
  return 2.0 * extent / (points_per_axis - 1);
}

std::size_t GridSpec::node_count() const {
  if (kind == GridKind::Radial) return static_cast<std::size_t>(points_per_axis);
  std::size_t count = 1;
  for (int d = 0; d < n; ++d) count *= static_cast<std::size_t>(points_per_axis);
  return count;
}

double GridSpec::axis_coord(int j) const { return -extent + j * h(); }

double GridSpec::radius(int i) const { return (i + 0.5) * h(); }

Field radial_distance_field(const GridSpec& g) {
  g.check();
  const std::size_t count = g.node_count();
  Field out(count);
  if (g.kind == GridKind::Radial) {
    for (int i = 0; i < g.points_per_axis; ++i) out[i] = g.radius(i);
    return out;
  }
  const int m = g.points_per_axis;
  std::size_t idx = 0;
  if (g.n == 1) {
    for (int i = 0; i < m; ++i) out[idx++] = std::abs(g.axis_coord(i));
  } else if (g.n == 2) {
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        out[idx++] = std::hypot(g.axis_coord(i), g.axis_coord(j));
  } else {
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k)
          out[idx++] = std::hypot(g.axis_coord(i), g.axis_coord(j), g.axis_coord(k));
  }
  return out;
}

Field coordinate_field(const GridSpec& g, int axis) {
  g.check();
  if (g.kind == GridKind::Radial) {
    if (axis != 0) throw DomainError("coordinate_field: radial grids have only axis 0");
    return radial_distance_field(g);
  }
  if (axis < 0 || axis >= g.n) throw DomainError("coordinate_field: axis out of range");
  const int m = g.points_per_axis;
  Field out(g.node_count());
  std::size_t idx = 0;
  if (g.n == 1) {
    for (int i = 0; i < m; ++i) out[idx++] = g.axis_coord(i);
  } else if (g.n == 2) {
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) out[idx++] = g.axis_coord(axis == 0 ? i : j);
  } else {
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k)
          out[idx++] = g.axis_coord(axis == 0 ? i : (axis == 1 ? j : k));
  }
  return out;
}

Field volume_weights(const GridSpec& g) {
  g.check();
  if (g.kind == GridKind::Full) {
    return Field::Constant(g.node_count(), std::pow(g.h(), g.n));
  }
  const double omega = unit_sphere_area(g.n);
  const double h = g.h();
  Field out(g.points_per_axis);
  for (int i = 0; i < g.points_per_axis; ++i) {
    const double r_lo = i * h;
    const double r_hi = (i + 1) * h;
    out[i] = omega * (std::pow(r_hi, g.n) - std::pow(r_lo, g.n)) / g.n;
  }
  return out;
}

Vec node_position(const GridSpec& g, std::size_t flat_index) {
  Vec x = Vec::Zero(g.n);
  if (g.kind == GridKind::Radial) {
    x[0] = g.radius(static_cast<int>(flat_index));
    return x;
  }
  const std::size_t m = static_cast<std::size_t>(g.points_per_axis);
  for (int d = g.n - 1; d >= 0; --d) {
    x[d] = g.axis_coord(static_cast<int>(flat_index % m));
    flat_index /= m;
  }
  return x;
}

}  // namespace wavelab
