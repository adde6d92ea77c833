#pragma once

#include <cstdint>
#include <vector>

#include "wavelab/common.hpp"
#include "wavelab/estimate.hpp"
#include "wavelab/grid.hpp"
#include "wavelab/metric.hpp"

namespace wavelab {

// ---------------------------------------------------------------------------
// Period-map probes: how much of the evolution, launched from data localised
// near the coefficient and observed there again N periods later, still has
// energy near the coefficient. The observable is the cutoff propagator
// g -> psi1 U(NT, 0) (psi2 g) acting on discrete Cauchy pairs with the
// energy-pair norm; its decay in N is the numerical proxy for local energy
// escaping to infinity. Results are evidence only: summable estimates are
// reported as consistent with the dispersive hypothesis, never as a proof.
// ---------------------------------------------------------------------------

struct CutoffPair {
  Field psi1, psi2;           // sampled on the working grid
  double inner_radius = 0.0;  // psi_i == 1 exactly for |x| <= inner_radius
  double outer_radius = 0.0;  // psi_i == 0 exactly for |x| >= outer_radius
  double period = 0.0;        // the T that shaped the geometry
};

/// Cutoffs for period T: identically 1 on |x| <= rho + 1 + 3T and supported
/// in |x| <= rho + 2 + 3T, built from the exact-support smooth step so both
/// properties hold in exact arithmetic. Both members share the profile.
/// Throws DomainError when the grid cannot hold the support.
CutoffPair make_cutoff_pair(const GridSpec& grid, const Metric& metric, double T);

struct ProbeOptions {
  int probes = 8;         // independent random starts
  int refine_steps = 5;   // power-iteration refinements per start
  std::uint64_t seed = 20260819ull;
  int threads = 0;        // 0: library default; probes run in parallel
  double memory_budget_mb = 512.0;
  // Probe data shapes. count == 0 (the default here) means "derive from the
  // cutoffs": cutoff_norm_estimate substitutes default_probe_band(cutoffs).
  PacketBand band = {.count = 0};
};

/// Probe band fitted inside the cutoff plateau, so that probe data starts
/// where psi_i == 1 exactly.
PacketBand default_probe_band(const CutoffPair& cutoffs);

/// Domain-of-dependence sized copy of `reference` for horizon N * T over the
/// cutoff support: same kind, dimension, and nodes-per-unit resolution, with
/// the extent grown so no signal from the support reaches the boundary by
/// t = N * T. Throws ResourceError when the working set for that grid would
/// exceed the memory budget (callers record that N as skipped).
GridSpec monodromy_grid(const GridSpec& reference, const Metric& metric, double T, int N,
                        double memory_budget_mb = 512.0);

/// Estimate of the discrete energy-space operator norm of
/// g -> psi1 U(N T, 0) (psi2 g) by randomized probing: each of the `probes`
/// seeded starts spans band.count random smooth packet pairs, applies the
/// operator to each, and refines a random coefficient vector by
/// `refine_steps` power-iteration sweeps of the span-restricted pencil,
/// returning the largest Rayleigh-type quotient seen (as a norm, after the
/// square root). Probing from below: every reported quotient is a certified
/// lower bound for the true discrete norm, and more probes never decrease
/// the estimate. Probing the smooth span, rather than feeding raw images
/// back, keeps the search inside the band of data the scheme transports.
///
/// Preconditions (DomainError): N >= 0; cutoffs sampled on `grid` and sized
/// for its extent; the metric either time-independent or periodic with
/// period equal to cutoffs.period; grid extent at least
/// outer_radius + sqrt(C0) N T (domain of dependence for the horizon).
double cutoff_norm_estimate(const Metric& metric, const GridSpec& grid,
                            const CutoffPair& cutoffs, int N, const ProbeOptions& opts = {});

struct DecaySeries {
  std::vector<int> N_values;
  std::vector<double> norm_estimates;  // aligned with N_values; >= 0
  std::vector<bool> skipped;           // true: resource-skipped, no estimate
  double period = 0.0;
};

/// Run cutoff_norm_estimate over N_values (ascending, nonnegative;
/// DomainError otherwise), sizing a fresh domain-of-dependence grid per N
/// from `reference`. An N whose grid exceeds the memory budget is recorded
/// as skipped rather than failing the series.
DecaySeries measure_decay_series(const Metric& metric, const GridSpec& reference, double T,
                                 const std::vector<int>& N_values,
                                 const ProbeOptions& opts = {});

enum class DecayModel { Exponential, LogSquared };

const char* to_string(DecayModel m);

struct DecayFit {
  DecayModel best = DecayModel::Exponential;
  // log-least-squares parameters of c * exp(-delta N T)
  double c_exp = 0.0;
  double delta = 0.0;
  double residual_exp = 0.0;  // RMS residual on log values
  // log-least-squares parameter of c / ((N + 1) ln^2(N + e))
  double c_log = 0.0;
  double residual_log = 0.0;
  // summability proxy: partial sum of the estimates plus a tail extrapolated
  // from the better-fitting model beyond the last measured N (infinite when
  // the better model does not decay)
  double partial_sum = 0.0;
  double tail = 0.0;
  double summability = 0.0;
  int terms_used = 0;
};

/// Fit both decay models to the unskipped entries by least squares on log
/// values (estimates are floored at 1e-30 so exact zeros stay fittable) and
/// report residuals plus the summability proxy. Requires at least 5
/// unskipped estimates (DomainError).
DecayFit decay_fit(const DecaySeries& series);

}  // namespace wavelab
