#pragma once

#include "wavelab/common.hpp"
#include "wavelab/grid.hpp"
#include "wavelab/metric.hpp"

#include <optional>
#include <vector>

namespace wavelab {

inline constexpr double cfl_safety = 0.9;

/// Largest stable time step for the explicit scheme on this grid/coefficient:
/// cfl_safety * h / sqrt(n * C0).
double cfl_dt(const GridSpec& grid, const Metric& metric);

/// Discrete div(a(t,x) grad u) in flux form: coefficients averaged onto cell
/// faces, exact zero-flux at the radial origin, Dirichlet ghosts (u = 0,
/// a = 1) outside DomainOfDependence boxes, wrap-around for Periodic ones.
/// Face geometry and static coefficients are cached across applications.
class DivAGradOp {
 public:
  DivAGradOp(const Metric& metric, const GridSpec& grid);

  /// out = div(a(t) grad u); out is resized as needed.
  void apply(double t, const Field& u, Field& out);

  /// Node values of a(t, x_i) (diagnostics; shares the internal buffer).
  const Field& node_coefficients(double t);

 private:
  void refresh(double t);

  const Metric metric_;
  GridSpec grid_;
  bool time_dependent_ = false;
  bool refreshed_once_ = false;
  double cached_t_ = 0.0;
  Field nodes_;  // a at nodes for the cached time
  std::vector<Field> faces_;  // per axis: face coefficient ahead of each node
  // radial geometry: area/volume factors for the two faces of each cell
  Field geom_plus_, geom_minus_;
};

/// Source evaluated at a time level: may inspect the current field (direct
/// nonlinear stepping) or ignore it (precomputed Duhamel sources).
using ForcingFn = std::function<Field(int level, double t, const Field& u)>;

/// Called once per time level with the state at that level; velocities are
/// reconstructed centered in the interior and one-sided at the ends.
using ObserverFn = std::function<void(int level, double t, const Field& u, const Field& v)>;

struct PropagateOptions {
  ForcingFn forcing;            // null: homogeneous equation
  ObserverFn observer;          // null: no per-level output
  double blowup_threshold = 1e6;
  bool throw_on_blowup = true;  // false: report through PropagateResult
};

struct PropagateResult {
  StatePair state;  // final level (or last safe level when blew_up)
  bool blew_up = false;
  double last_safe_time = 0.0;
  double first_unstable_time = 0.0;
  int steps_taken = 0;
  double dt_used = 0.0;
};

/// Advances (u, u_t) from time s to time t under u_tt = div(a grad u) + F by
/// explicit leapfrog. grid.dt > 0 must divide t - s and satisfy the CFL
/// bound (CflError otherwise); grid.dt = 0 derives the step from the bound.
/// Throws BlowupError when the field passes blowup_threshold (unless
/// options.throw_on_blowup is false).
PropagateResult propagate_run(const Metric& metric, const GridSpec& grid, const StatePair& state,
                              double s, double t, const PropagateOptions& options = {});

/// Convenience wrapper returning the final state; always throws on blow-up.
StatePair propagate(const Metric& metric, const GridSpec& grid, const StatePair& state, double s,
                    double t, const PropagateOptions& options = {});

/// A source sampled on the solver's time grid: f[m] at time m * dt.
struct SourceSeries {
  GridSpec grid;
  double dt = 0.0;
  std::vector<Field> f;

  double t_final() const { return dt * (f.empty() ? 0 : (f.size() - 1)); }
};

/// The inhomogeneous part of the Duhamel formula at time t: the solution of
/// u_tt = div(a grad u) + h with zero initial data, computed by one forced
/// propagation from 0 to t on the source's own time grid.
StatePair duhamel_term(const Metric& metric, const SourceSeries& h, double t);

/// Dense-in-time propagation: collects (u, v) at every level.
struct History {
  GridSpec grid;
  double dt = 0.0;
  double t0 = 0.0;
  std::vector<Field> u;
  std::vector<Field> v;

  int levels() const { return static_cast<int>(u.size()); }
  double time_at(int level) const { return t0 + dt * level; }
};

History propagate_history(const Metric& metric, const GridSpec& grid, const StatePair& state,
                          double s, double t, const PropagateOptions& options = {});

}  // namespace wavelab
