#pragma once

#include <cstdint>
#include <vector>

#include "wavelab/common.hpp"
#include "wavelab/metric.hpp"

namespace wavelab {

// ---------------------------------------------------------------------------
// Bicharacteristic flow of the principal symbol tau^2 - a(t, x) |xi|^2.
//
// Rays are integral curves of the Hamilton equations in the parameter sigma:
//
//   dx/dsigma  = -2 a xi        dt/dsigma   = 2 tau
//   dxi/dsigma = |xi|^2 grad a  dtau/dsigma = |xi|^2 dt a
//
// with tau(0) > 0 (forward-in-time convention, so t(sigma) is increasing)
// and the null constraint tau^2 = a |xi|^2 imposed at launch. The flow
// preserves the constraint exactly; the integrator monitors the relative
// residual |tau^2 - a|xi|^2| / (tau^2 + a|xi|^2) as its accuracy gauge.
// ---------------------------------------------------------------------------

struct RayState {
  double t = 0.0;
  Vec x;          // position, n components
  double tau = 1.0;
  Vec xi;         // spatial frequency, n components
  double sigma = 0.0;

  /// tau^2 - a(t, x) |xi|^2.
  double hamiltonian(const Metric& metric) const;

  /// |tau^2 - a|xi|^2| / (tau^2 + a|xi|^2); 0 for the zero covector.
  double constraint_residual(const Metric& metric) const;
};

/// Launch state at (t, x) with frequency along `direction` (any nonzero
/// vector; it is normalised) and tau = sqrt(a(t, x)) > 0, so the null
/// constraint holds exactly at sigma = 0. Throws DomainError for a zero
/// direction or mismatched dimensions.
RayState make_null_ray(const Metric& metric, double t, const Vec& x, const Vec& direction);

struct Trajectory {
  std::vector<RayState> samples;   // every integrator level, launch first
  double max_drift = 0.0;          // worst relative constraint residual seen
  double step = 0.0;               // sigma step actually used

  // First escape parameters for the requested radii: escape_sigma[i] is the
  // first sigma with |x(sigma)| > radii[i] *and* outgoing radial motion
  // (x . dx/dsigma > 0), located by linear interpolation between the
  // bracketing levels; NaN when the ray never clears that radius within the
  // traced range. Radii are kept in the caller's order.
  std::vector<double> radii;
  std::vector<double> escape_sigma;

  /// escape_sigma entry for radius R; throws DomainError if R was not traced.
  double escape_at(double R) const;
};

/// Integrate the ray from `initial` over sigma in [initial.sigma,
/// initial.sigma + sigma_max] with the classical fourth-order Runge-Kutta
/// scheme at fixed step `step` (the final step is shortened to land on the
/// endpoint). Records first-escape parameters for each entry of `radii`.
///
/// Preconditions (DomainError): sigma_max > 0, step > 0, dimensions agree,
/// initial.tau > 0, |x(0)| <= metric.rho, and the null constraint holds at
/// launch to within 1e-10 relative. Escaping the coefficient's support is
/// allowed and expected; re-validation only happens at launch.
///
/// Throws ConstraintDriftError as soon as the relative constraint residual
/// exceeds 1e-8 at an accepted level; shrink `step` to restore accuracy.
Trajectory trace_ray(const Metric& metric, const RayState& initial, double sigma_max,
                     double step, const std::vector<double>& radii = {});

/// Relative residual limit enforced by trace_ray at every accepted level.
inline constexpr double ray_drift_tol = 1e-8;

// ---------------------------------------------------------------------------
// Non-trapping scan: a stratified fan of null rays launched from the
// coefficient's support, with per-radius worst-case escape parameters.
// ---------------------------------------------------------------------------

enum class TrapVerdict { NonTrapping, TrappingSuspected, Inconclusive };

const char* to_string(TrapVerdict v);

struct ScanConfig {
  int n = 3;                   // spatial dimension of the rays
  int n_rays = 100;            // fan size (>= 2; two probes are pinned)
  double sigma_max = 20.0;     // per-ray parameter budget
  double step = 0.005;         // integrator step
  std::uint64_t seed = 20260819ull;  // jitter seed, recorded in the table
  int threads = 0;             // 0: hardware concurrency
};

struct EscapeTable {
  std::vector<double> R_values;     // ascending
  std::vector<double> S_R;          // sup over rays of first escape; NaN when
                                    // some ray never escaped that radius
  std::vector<int> escaped_rays;    // rays that cleared each radius
  int rays_launched = 0;
  int rays_drifted = 0;             // excluded: constraint drift exceeded tol
  double max_drift = 0.0;           // worst residual among surviving rays
  double sigma_max = 0.0;
  std::uint64_t seed = 0;
  TrapVerdict verdict = TrapVerdict::Inconclusive;
};

/// Launch a deterministic fan of config.n_rays null rays against the
/// coefficient and tabulate worst-case escape parameters for each radius in
/// R_values (must be positive and strictly ascending; DomainError otherwise).
///
/// The fan is stratified: launch positions fill |x| <= rho (boundary
/// included), frequency directions cover the unit sphere with a seeded
/// jitter, and for time-periodic coefficients the launch times additionally
/// stratify [0, period). Two probes are always pinned: the central ray
/// (x = 0) and the worst boundary ray (|x| = rho pointing inward). Rays whose
/// constraint residual exceeds the tolerance are excluded and counted in
/// rays_drifted.
///
/// Verdict:
///   NonTrapping       every surviving ray escaped every radius, and fewer
///                     than 1% of rays drifted;
///   TrappingSuspected some ray failed to escape although the budget was
///                     generous (sigma_max >= 2x the largest observed escape
///                     parameter);
///   Inconclusive      more than 1% of rays drifted, or rays failed to
///                     escape without a generous budget (including: nothing
///                     escaped at all).
/// A scan that saw any non-escaping ray never reports NonTrapping.
EscapeTable nontrapping_scan(const Metric& metric, const std::vector<double>& R_values,
                             const ScanConfig& config);

}  // namespace wavelab
