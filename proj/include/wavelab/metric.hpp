#pragma once

#include "wavelab/common.hpp"
#include "wavelab/grid.hpp"

namespace wavelab {

// ---------------------------------------------------------------------------
// Smooth compactly-supported profiles shared by coefficient families, cutoff
// functions, and test data. Both evaluate to exactly 0 / exactly 1 outside
// their transition zones, so support and plateau properties hold in exact
// arithmetic, not merely to rounding.
// ---------------------------------------------------------------------------

/// chi(s) = exp(1 - 1/(1 - s^2)) for |s| < 1, 0 otherwise. chi(0) = 1.
double bump_chi(double s);

/// d/ds of bump_chi.
double bump_chi_prime(double s);

/// Monotone C-infinity step: 0 for s <= 0, 1 for s >= 1.
double smooth_plateau(double s);

// ---------------------------------------------------------------------------
// Coefficient functions a(t, x): bounded above and below, equal to 1 outside
// the ball |x| <= rho, optionally time-periodic.
// ---------------------------------------------------------------------------

enum class MetricFamily { Unit, StaticBump, PeriodicBump, Custom };

const char* to_string(MetricFamily f);

struct MetricSample {
  double value = 1.0;     // a(t, x)
  double dt_value = 0.0;  // time derivative of a at (t, x)
  Vec grad_value;         // spatial gradient of a at (t, x)
};

struct Metric {
  MetricFamily family = MetricFamily::Unit;
  double c0 = 1.0;     // inf a
  double C0 = 1.0;     // sup a
  double rho = 1.0;    // a == 1 for |x| >= rho
  double period = 0.0; // 0: no time dependence
  double amplitude = 0.0;
  double mod_depth = 0.0;

  // Custom family only: pointwise callables. Derivative callables may be
  // absent, in which case centered finite differences (step 1e-6) stand in
  // and fd_fallback is set.
  std::function<double(double, const Vec&)> custom_value;
  std::function<double(double, const Vec&)> custom_dt;
  std::function<Vec(double, const Vec&)> custom_grad;
  bool fd_fallback = false;

  double value(double t, const Vec& x) const;
  double dt_value(double t, const Vec& x) const;
  Vec grad_value(double t, const Vec& x) const;
  MetricSample sample(double t, const Vec& x) const;

  /// True when a genuinely depends on t (drives coefficient caching).
  bool time_dependent() const;
};

Metric make_unit_metric(double rho = 1.0);

/// a(x) = 1 + amplitude * chi(|x| / rho). Requires amplitude > -1 so that
/// inf a > 0; bounds are tight by the closed form.
Metric make_static_bump(double amplitude, double rho);

/// a(t, x) = 1 + amplitude * (1 + mod_depth * sin(2 pi t / period)) * chi(|x| / rho).
/// Requires amplitude > -1, 0 <= mod_depth < 1, and inf a > 0; bounds are
/// tight by the closed form.
Metric make_periodic_bump(double amplitude, double rho, double period, double mod_depth);

/// Coefficient given by closed-form callables. `period` = 0 declares time
/// independence. Claimed bounds are carried as-is; `validate` checks them by
/// sampling. Missing derivative callables fall back to finite differences.
Metric make_custom_metric(std::function<double(double, const Vec&)> value, double rho,
                          double period, double c0_claim, double C0_claim,
                          std::function<double(double, const Vec&)> dt = nullptr,
                          std::function<Vec(double, const Vec&)> grad = nullptr);

// ---------------------------------------------------------------------------
// Sampled validation of the coefficient against its declared contract.
// ---------------------------------------------------------------------------

struct ValidationReport {
  double min_value = 0.0;
  double max_value = 0.0;
  double max_support_violation = 0.0;    // max |a - 1| over nodes with |x| >= rho
  double max_periodicity_defect = 0.0;   // max |a(t + T) - a(t)|, periodic only
  bool c0_violation = false;             // min < c0 (beyond tolerance)
  bool C0_violation = false;             // max > C0 (beyond tolerance)
  bool positivity_violation = false;     // min <= 0
  bool fd_fallback = false;

  bool ok() const {
    return !c0_violation && !C0_violation && !positivity_violation &&
           max_support_violation <= 1e-12 && max_periodicity_defect <= 1e-13;
  }
};

/// Samples a on all grid nodes at n_time_samples times spanning one period
/// (a single instant for static metrics) and reports extremes, support
/// defects outside rho, and the periodicity defect. Requires the grid to
/// cover the ball |x| <= rho.
ValidationReport validate(const Metric& metric, const GridSpec& grid, int n_time_samples);

/// a(t, x_i) at every grid node (vectorized for the built-in families).
Field coefficient_field(const Metric& metric, const GridSpec& grid, double t);

/// Time derivative of a at every grid node.
Field coefficient_dt_field(const Metric& metric, const GridSpec& grid, double t);

}  // namespace wavelab
