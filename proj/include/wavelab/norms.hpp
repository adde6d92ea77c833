#pragma once

#include <map>
#include <optional>
#include <vector>

#include "wavelab/common.hpp"
#include "wavelab/grid.hpp"
#include "wavelab/metric.hpp"

namespace wavelab {

// Discrete norms of a state: Sobolev/Lebesgue quantities plus the metric-weighted energy.
struct NormReport {
  double h1dot = 0.0;                  // |u|_{H^1-dot}, gradient seminorm
  double l2 = 0.0;                     // |v|_{L^2}
  double energy = 0.0;                 // 1/2 * integral(v^2 + a |grad u|^2)
  std::map<double, double> lq;         // |u|_{L^q} for each requested q
  std::optional<double> hgamma;        // |u|_{H^gamma-dot} (Periodic grids only)
  std::optional<double> gamma;         // the gamma the report was evaluated at
};

// Gradient seminorm of a scalar field: centered differences on full grids,
// face differences on radial grids.
double h1dot_norm(const GridSpec& grid, const Field& u);

// Volume-weighted L^2 norm.
double l2_norm(const GridSpec& grid, const Field& f);

// Volume-weighted L^q norm; q = +inf gives the max norm.
double lq_norm(const GridSpec& grid, const Field& f, double q);

// 1/2 * sum(w v^2) + 1/2 * sum over faces of w_f a_f (du/h)^2 with the
// coefficient evaluated at state.time.
double energy_value(const Metric& metric, const GridSpec& grid, const StatePair& state);

// Spectral seminorm via the DFT multiplier |xi|^gamma with the zero mode dropped.
// Defined on Periodic full grids only; throws ConfigError otherwise.
double hgamma_norm(const GridSpec& grid, const Field& u, double gamma);

// Norm of the data pair (u, v) in the energy space: sqrt(h1dot(u)^2 + l2(v)^2).
double energy_pair_norm(const GridSpec& grid, const StatePair& state);

// Bundle of all state norms at one time.
NormReport norms(const Metric& metric, const GridSpec& grid, const StatePair& state,
                 const std::vector<double>& q_list = {},
                 std::optional<double> gamma = std::nullopt);

// (sum_m w_m |u_m|_{L^q}^p dt)^{1/p} with trapezoid weights over a uniform time grid.
double spacetime_norm(const GridSpec& grid, const std::vector<Field>& u_series, double dt,
                      double p, double q);

}  // namespace wavelab
