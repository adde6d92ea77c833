#pragma once

#include "wavelab/grid.hpp"
#include "wavelab/metric.hpp"
#include "wavelab/nonlinearity.hpp"
#include "wavelab/propagate.hpp"

#include <limits>
#include <vector>

namespace wavelab {

/// Controls for the fixed-point iteration u <- linear flow + forced flow of
/// f(u). `tol` is measured in the solution-space norm (sup-in-time energy
/// seminorm plus the space-time Lebesgue norm, see y_norm).
struct PicardConfig {
  int max_iters = 25;
  double tol = 1e-8;
  double t1 = 1.0;  // interval length the fixed point is sought on
  double blowup_threshold = 1e6;
};

struct PicardDiagnostics {
  std::vector<double> differences;  // per-iteration gap in the Y norm
  double contraction_ratio = 0.0;   // last observed gap ratio, 0 if < 2 gaps
  int iters_used = 0;
  bool converged = false;
  bool exploratory_k = false;  // power outside the guaranteed window
  double p = 0.0, q = 0.0;     // space-time exponents backing the Y norm
  double y_norm = 0.0;         // Y norm of the returned solution
};

struct PicardResult {
  History history;  // dense-in-time solution levels
  PicardDiagnostics diagnostics;
};

/// Iteration norm: sup over time levels of the homogeneous H^1 seminorm plus
/// the discrete L^p_t L^q_x norm. p may be +infinity (sup-in-time L^q).
double y_norm(const GridSpec& grid, const std::vector<Field>& u_levels, double dt,
              double p, double q);

/// Space-time exponents used for the iteration norm of a power-k problem in
/// dimension n, and whether that power lies outside the guaranteed local
/// window (exploratory mode: q = 2k and p from the scaling identity, clamped
/// to [1, +infinity]).
struct YNormExponents {
  double p = std::numeric_limits<double>::infinity();
  double q = 2.0;
  bool exploratory = false;
};
YNormExponents y_norm_exponents(int n, double k);

/// Fixed-point solve of u = (linear flow of data) + (forced flow of f(u)) on
/// [0, t1]. Each iteration is a single explicit propagation of the data with
/// the previous iterate's nonlinearity as source; convergence is declared
/// when successive iterates differ by at most cfg.tol in the Y norm.
/// Throws NoConvergenceError when max_iters is exhausted and BlowupError when
/// an iterate exceeds cfg.blowup_threshold in sup norm.
PicardResult picard_solve(const Metric& metric, const GridSpec& grid, const StatePair& data,
                          const Nonlinearity& nl, const PicardConfig& cfg);

/// Independent oracle: explicit leapfrog with f(u) evaluated from the current
/// level each step. Throws BlowupError (with the bracketing times) when the
/// solution exceeds the threshold before t1.
History direct_solve(const Metric& metric, const GridSpec& grid, const StatePair& data,
                     const Nonlinearity& nl, double t1, double blowup_threshold = 1e6);

/// Calibrated constants for the small-data existence budget:
///   A_k  — homogeneous space-time/energy quotient of the linear flow,
///   C3   — forced-flow quotient times the nonlinearity growth constant,
///   C7   — the same chain applied to the Lipschitz form of f.
struct BudgetConstants {
  double A_k = 1.0;
  double C3 = 1.0;
  double C7 = 1.0;
};

struct Budget {
  double M = 0.0;      // ball radius the iteration is confined to
  double alpha = 0.0;  // midpoint of the admissible radius interval
  double t1 = 0.0;     // reduced interval length before the exponent lift
  double T1 = 0.0;     // guaranteed existence time
  double p = 0.0, q = 0.0;  // space-time pair behind the k/p exponent
};

/// Closed-form (M, T1) making the Duhamel map a contraction on the radius-M
/// ball over [0, T1] for data of norm g_norm, given calibrated constants:
///   M  = alpha 2^{k-1} A_k g_norm / (2^{k-1} - 1),  alpha the midpoint of
///        (1 - 2^{-(k-1)}, 1),
///   t1 = (M - A_k g_norm) / (C3 M^k),   T1 = t1^{1/(1 - k/p)}.
/// Both contraction inequalities
///   A_k g_norm + C3 M^k T1^{1-k/p} <= M,   C7 (2M)^{k-1} T1^{1-k/p} < 1
/// are re-checked on the produced values; InfeasibleError reports a failure
/// (possible when the supplied constants are mutually inconsistent, or at
/// the closed window endpoint in n >= 6 where k/p = 1 and the exponent lift
/// degenerates).
Budget existence_budget(int n, double k, double g_norm, const BudgetConstants& constants);

struct LifespanRecord {
  double epsilon = 0.0;
  double t_star = 0.0;   // detected existence time (= horizon when censored)
  bool censored = false;  // reached the horizon without blow-up
  double t1_theory = std::numeric_limits<double>::quiet_NaN();  // anchored C eps^{-d}
  int iters_used = 0;    // time steps consumed by the solver
};

struct SweepResult {
  std::vector<LifespanRecord> records;  // in the order the amplitudes were given
  double slope_fit = std::numeric_limits<double>::quiet_NaN();  // d log t* / d log eps
  double d_theory = std::numeric_limits<double>::quiet_NaN();   // lifespan exponent
  double anchor_coefficient = std::numeric_limits<double>::quiet_NaN();  // C above
};

/// Amplitude sweep: for each eps (strictly decreasing) runs the direct solver
/// on eps * data_template until blow-up or the horizon, recording the
/// existence time (censoring is data, not an error). Fits the log-log slope
/// of t_star against eps over uncensored records and anchors the theoretical
/// curve C eps^{-d} at the largest uncensored amplitude. data_template must
/// have unit energy-pair norm; spatially constant templates (zero seminorm)
/// are accepted with unit sup amplitude instead.
SweepResult lifespan_sweep(const Metric& metric, const GridSpec& grid,
                           const StatePair& data_template, const Nonlinearity& nl,
                           const std::vector<double>& epsilons, double horizon,
                           int threads = 0);

}  // namespace wavelab
