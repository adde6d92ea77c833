#pragma once

#include "wavelab/common.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace wavelab {

/// Local: estimates on a finite time interval, any regularity gamma > 0.
/// Global: estimates uniform in time, which pin the regularity to the energy
/// index (gamma = 1) and need strict time integrability (p > 2).
enum class Regime { Local, Global };

inline const char* to_string(Regime r) { return r == Regime::Local ? "local" : "global"; }

/// Comparison slack for exponent arithmetic. All admissibility decisions are
/// made to this absolute tolerance.
inline constexpr double exponent_tol = 1e-12;

/// A user-facing query: dimension, nonlinearity power, regularity, regime.
struct ExponentQuery {
  int n = 3;
  double k = 4.0;
  double gamma = 1.0;
  Regime regime = Regime::Local;
};

struct AdmissibilityReport {
  bool admissible = false;
  bool scaling_ok = false;   // 1/p == n(1/2 - 1/q) - gamma
  bool knapp_ok = false;     // 1/p <= (n-1)/2 * (1/2 - 1/q)
  bool p_strict_ok = true;   // p > 2, only binding in the global regime
  double gamma_used = 1.0;   // the gamma actually tested (forced to 1 globally)
  double scaling_lhs = 0.0, scaling_rhs = 0.0;
  double knapp_lhs = 0.0, knapp_rhs = 0.0;
};

/// Checks whether (p, q) is an admissible space-time pair at regularity
/// gamma: the scaling identity must hold (to tolerance) and the
/// stationary-phase concentration bound must not be violated. The global
/// regime tests at gamma = 1 regardless of the passed value and requires
/// p > 2 strictly. Out-of-range n, p, q throw DomainError; inadmissible but
/// well-formed queries return a report with admissible = false.
inline AdmissibilityReport check_admissible(int n, double p, double q, double gamma,
                                            Regime regime) {
  if (n < 3) throw DomainError("check_admissible: dimension must be >= 3");
  if (!std::isfinite(p) || p < 2.0 - exponent_tol)
    throw DomainError("check_admissible: p must be finite and >= 2");
  if (!std::isfinite(q) || q < 2.0 - exponent_tol)
    throw DomainError("check_admissible: q must be finite and >= 2");
  if (regime == Regime::Local && (!std::isfinite(gamma) || gamma <= 0.0))
    throw DomainError("check_admissible: gamma must be positive");

  AdmissibilityReport r;
  r.gamma_used = (regime == Regime::Global) ? 1.0 : gamma;
  r.p_strict_ok = (regime == Regime::Global) ? (p > 2.0 + exponent_tol) : true;

  r.scaling_lhs = 1.0 / p;
  r.scaling_rhs = n * (0.5 - 1.0 / q) - r.gamma_used;
  r.scaling_ok = std::abs(r.scaling_lhs - r.scaling_rhs) <= exponent_tol;

  r.knapp_lhs = 1.0 / p;
  r.knapp_rhs = 0.5 * (n - 1.0) * (0.5 - 1.0 / q);
  r.knapp_ok = r.knapp_lhs <= r.knapp_rhs + exponent_tol;

  r.admissible = r.scaling_ok && r.knapp_ok && r.p_strict_ok;
  return r;
}

inline bool is_admissible(int n, double p, double q, double gamma, Regime regime) {
  return check_admissible(n, p, q, gamma, regime).admissible;
}

/// Interval of nonlinearity powers k for which the fixed-point argument
/// closes. The lower endpoint is always open; the upper endpoint is closed
/// only for n >= 6 under the local regime, where the binding constraint is
/// p >= 2 instead of p > 2. Endpoints are stored both as doubles and as
/// exact integer fractions so containment at a boundary is decided by the
/// fraction, not by rounding.
struct KWindow {
  int n = 3;
  Regime regime = Regime::Local;
  double lower = 0.0, upper = 0.0;
  bool upper_closed = false;
  int lower_num = 0, lower_den = 1, upper_num = 0, upper_den = 1;

  bool contains(double k) const {
    if (k * lower_den - lower_num <= exponent_tol * lower_den) return false;
    const double upper_resid = k * upper_den - upper_num;
    if (std::abs(upper_resid) <= exponent_tol * upper_den) return upper_closed;
    return upper_resid < 0.0;
  }
};

/// Window of admissible powers in dimension n. For n <= 5 the upper bound is
/// where the lifespan exponent diverges, (n+2)/(n-2), open in both regimes.
/// For n >= 6 the upper bound is n/(n-3), where the pair construction lands
/// on p = 2: closed for local estimates, open globally.
inline KWindow k_window(int n, Regime regime) {
  if (n < 3) throw DomainError("k_window: defined for dimension n >= 3");
  KWindow w;
  w.n = n;
  w.regime = regime;
  w.lower_num = n;
  w.lower_den = n - 2;
  if (n <= 5) {
    w.upper_num = n + 2;
    w.upper_den = n - 2;
    w.upper_closed = false;
  } else {
    w.upper_num = n;
    w.upper_den = n - 3;
    w.upper_closed = (regime == Regime::Local);
  }
  w.lower = static_cast<double>(w.lower_num) / w.lower_den;
  w.upper = static_cast<double>(w.upper_num) / w.upper_den;
  return w;
}

/// Everything the nonlinear construction needs about a power k in dimension
/// n: the space-time pair (p, q) at gamma = 1, the lifespan exponent d
/// (+infinity exactly at the closed n = 6 local endpoint, where k/p = 1),
/// and admissibility of the pair under each regime.
struct ExponentSet {
  int n = 3;
  double k = 0.0;
  double p = 0.0;
  double q = 0.0;
  double gamma = 1.0;
  double d = 0.0;
  bool admissible_local = false;
  bool admissible_global = false;
};

namespace detail {

/// d = 2(k-1) / ((n+2) - (n-2)k) with +infinity at a vanishing denominator.
inline double lifespan_exponent_or_inf(int n, double k) {
  const double den = (n + 2.0) - (n - 2.0) * k;
  if (den <= exponent_tol) return std::numeric_limits<double>::infinity();
  return 2.0 * (k - 1.0) / den;
}

}  // namespace detail

/// The exponent pair used to absorb a power-k nonlinearity: q = 2k puts the
/// k-th power of u in L^2 in space, and p then follows from the scaling
/// identity at gamma = 1, which gives k/p = ((n-2)k - n)/2. Throws
/// WindowError when k lies outside the window.
inline ExponentSet strichartz_pair_for_k(int n, double k, Regime regime) {
  const KWindow w = k_window(n, regime);
  if (!w.contains(k)) {
    std::ostringstream msg;
    msg << "strichartz_pair_for_k: k=" << k << " outside the " << to_string(regime)
        << " window (" << w.lower << ", " << w.upper << (w.upper_closed ? "]" : ")")
        << " for n=" << n;
    throw WindowError(msg.str());
  }
  ExponentSet s;
  s.n = n;
  s.k = k;
  s.gamma = 1.0;
  s.p = 2.0 * k / ((n - 2.0) * k - n);
  s.q = 2.0 * k;
  s.d = detail::lifespan_exponent_or_inf(n, k);
  s.admissible_local = check_admissible(n, s.p, s.q, 1.0, Regime::Local).admissible;
  s.admissible_global = check_admissible(n, s.p, s.q, 1.0, Regime::Global).admissible;
  return s;
}

/// Exponent d in the lifespan lower bound T ~ ||data||^{-d} for small data:
/// d = 2(k-1) / ((n+2) - (n-2)k). Positive and strictly increasing in k on
/// each window; throws DegenerateError when the denominator is not positive.
inline double lifespan_exponent(int n, double k) {
  if (n < 3) throw DomainError("lifespan_exponent: defined for dimension n >= 3");
  if (!(k > 1.0)) throw DomainError("lifespan_exponent: need power k > 1");
  const double den = (n + 2.0) - (n - 2.0) * k;
  if (den <= exponent_tol)
    throw DegenerateError("lifespan_exponent: denominator (n+2) - (n-2)k is not positive");
  return 2.0 * (k - 1.0) / den;
}

}  // namespace wavelab
