#pragma once

#include "wavelab/common.hpp"

namespace wavelab {

enum class GridKind { Full, Radial };
enum class Boundary { Periodic, DomainOfDependence };

/// Geometry of the discretization. Full grids cover the box [-L, L]^n for
/// n = 1, 2, 3 (periodic or with a Dirichlet rim placed outside the causal
/// range of the data); radial grids cover [0, L] with cell-centered nodes
/// r_i = (i + 1/2) h for radially symmetric problems in dimension n >= 3.
struct GridSpec {
  GridKind kind = GridKind::Full;
  int n = 1;
  double extent = 1.0;
  int points_per_axis = 129;
  double dt = 0.0;  // 0: derived from the CFL bound when propagation starts
  Boundary boundary = Boundary::DomainOfDependence;

  /// Shape validation; throws DomainError/ConfigError on malformed specs.
  void check() const;

  double h() const;
  std::size_t node_count() const;

  /// Coordinate of index j along one axis (full grids).
  double axis_coord(int j) const;
  /// Cell-center radius of index i (radial grids).
  double radius(int i) const;
};

/// A Cauchy pair (u, u_t) sampled on a grid at one instant.
struct StatePair {
  Field u;
  Field v;
  double time = 0.0;
};

/// |x| at every node: row-major over the box for full grids, the cell-center
/// radius for radial grids.
Field radial_distance_field(const GridSpec& g);

/// Coordinate of each node along `axis` (full grids only).
Field coordinate_field(const GridSpec& g, int axis);

/// Integration weight of each node: h^n on full grids; on radial grids the
/// exact shell volume omega_{n-1} (r_{i+1/2}^n - r_{i-1/2}^n) / n.
Field volume_weights(const GridSpec& g);

/// Position of a node as an n-vector (radial grids: r e_1). For sampling
/// callables at nodes, not for hot loops.
Vec node_position(const GridSpec& g, std::size_t flat_index);

}  // namespace wavelab
