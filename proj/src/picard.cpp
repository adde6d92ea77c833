#include "wavelab/picard.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "wavelab/exponents.hpp"
#include "wavelab/norms.hpp"

namespace wavelab {
namespace {

struct LevelStore {
  std::vector<Field> u, v;
};

/// One explicit propagation over [0, t1] collecting every level. Blow-up is
/// reported through the result, never thrown, so callers can attach times.
PropagateResult run_levels(const Metric& metric, const GridSpec& grid, const StatePair& data,
                           double t1, const ForcingFn& forcing, double blowup_threshold,
                           LevelStore& out) {
  out.u.clear();
  out.v.clear();
  PropagateOptions opt;
  opt.forcing = forcing;
  opt.blowup_threshold = blowup_threshold;
  opt.throw_on_blowup = false;
  opt.observer = [&out](int, double, const Field& u, const Field& v) {
    out.u.push_back(u);
    out.v.push_back(v);
  };
  return propagate_run(metric, grid, data, 0.0, t1, opt);
}

}  // namespace

YNormExponents y_norm_exponents(int n, double k) {
  YNormExponents y;
  try {
    const ExponentSet s = strichartz_pair_for_k(n, k, Regime::Local);
    y.p = s.p;
    y.q = s.q;
    y.exploratory = false;
    return y;
  } catch (const Error&) {
    // Outside the guaranteed window (or below the dimension floor): keep the
    // natural q = 2k and fall back on the scaling identity for p, clamped to
    // a norm-defining range. A nonpositive denominator means the pure power
    // imposes no time integrability and the sup norm stands in.
    y.exploratory = true;
    y.q = 2.0 * k;
    const double den = (n - 2.0) * k - n;
    y.p = den > exponent_tol ? std::max(1.0, 2.0 * k / den)
                             : std::numeric_limits<double>::infinity();
    return y;
  }
}

double y_norm(const GridSpec& grid, const std::vector<Field>& u_levels, double dt, double p,
              double q) {
  if (u_levels.empty()) return 0.0;
  double sup_h1 = 0.0;
  for (const Field& u : u_levels) sup_h1 = std::max(sup_h1, h1dot_norm(grid, u));
  return sup_h1 + spacetime_norm(grid, u_levels, dt, p, q);
}

PicardResult picard_solve(const Metric& metric, const GridSpec& grid, const StatePair& data,
                          const Nonlinearity& nl, const PicardConfig& cfg) {
  nl.validate();
  if (!(cfg.t1 > 0.0) || !std::isfinite(cfg.t1))
    throw ConfigError("picard_solve: interval length t1 must be positive and finite");
  if (!(cfg.tol > 0.0)) throw ConfigError("picard_solve: tolerance must be positive");
  if (cfg.max_iters < 1) throw ConfigError("picard_solve: max_iters must be >= 1");

  const YNormExponents ynx = y_norm_exponents(grid.n, nl.k);

  PicardDiagnostics diag;
  diag.exploratory_k = ynx.exploratory;
  diag.p = ynx.p;
  diag.q = ynx.q;

  // Starting iterate: the linear flow of the data (no source).
  LevelStore cur;
  PropagateResult res = run_levels(metric, grid, data, cfg.t1, ForcingFn{}, cfg.blowup_threshold, cur);
  if (res.blew_up)
    throw BlowupError("picard_solve: linear flow exceeded the blow-up threshold",
                      res.last_safe_time, res.first_unstable_time);
  const double dt = res.dt_used;

  // Each sweep applies the Duhamel map once: propagate the data again with
  // the previous iterate's nonlinearity as the source. The forcing callback
  // runs exactly once per level, so indexing by level is safe.
  LevelStore next;
  bool converged = false;
  for (int iter = 1; iter <= cfg.max_iters && !converged; ++iter) {
    const std::vector<Field>& prev_u = cur.u;
    ForcingFn forcing = [&nl, &prev_u](int level, double, const Field&) {
      return nl.apply(prev_u[static_cast<std::size_t>(level)]);
    };
    const PropagateResult it_res =
        run_levels(metric, grid, data, cfg.t1, forcing, cfg.blowup_threshold, next);
    diag.iters_used = iter;
    if (it_res.blew_up)
      throw BlowupError("picard_solve: iterate exceeded the blow-up threshold",
                        it_res.last_safe_time, it_res.first_unstable_time);

    std::vector<Field> gap(next.u.size());
    for (std::size_t m = 0; m < next.u.size(); ++m) gap[m] = next.u[m] - cur.u[m];
    const double diff = y_norm(grid, gap, dt, ynx.p, ynx.q);
    if (!diag.differences.empty() && diag.differences.back() > 0.0)
      diag.contraction_ratio = diff / diag.differences.back();
    diag.differences.push_back(diff);

    std::swap(cur.u, next.u);
    std::swap(cur.v, next.v);
    converged = diff <= cfg.tol;
  }

  if (!converged) {
    const std::size_t n_d = diag.differences.size();
    const bool shrinking =
        n_d >= 2 && diag.differences[n_d - 1] < diag.differences[n_d - 2];
    std::ostringstream msg;
    msg << "picard_solve: no fixed point within " << cfg.max_iters << " iterations (last gap "
        << diag.differences.back() << " vs tolerance " << cfg.tol << ", gaps "
        << (shrinking ? "still shrinking)" : "not shrinking)");
    throw NoConvergenceError(msg.str());
  }

  diag.converged = true;
  diag.y_norm = y_norm(grid, cur.u, dt, ynx.p, ynx.q);

  PicardResult out;
  out.history.grid = grid;
  out.history.dt = dt;
  out.history.t0 = 0.0;
  out.history.u = std::move(cur.u);
  out.history.v = std::move(cur.v);
  out.diagnostics = std::move(diag);
  return out;
}

History direct_solve(const Metric& metric, const GridSpec& grid, const StatePair& data,
                     const Nonlinearity& nl, double t1, double blowup_threshold) {
  nl.validate();
  if (!(t1 > 0.0) || !std::isfinite(t1))
    throw ConfigError("direct_solve: interval length t1 must be positive and finite");

  History hist;
  hist.grid = grid;
  hist.t0 = 0.0;
  PropagateOptions opt;
  opt.forcing = [&nl](int, double, const Field& u) { return nl.apply(u); };
  opt.blowup_threshold = blowup_threshold;
  opt.throw_on_blowup = true;
  opt.observer = [&hist](int, double, const Field& u, const Field& v) {
    hist.u.push_back(u);
    hist.v.push_back(v);
  };
  const PropagateResult res = propagate_run(metric, grid, data, 0.0, t1, opt);
  hist.dt = res.dt_used;
  return hist;
}

Budget existence_budget(int n, double k, double g_norm, const BudgetConstants& constants) {
  if (!(constants.A_k > 0.0) || !std::isfinite(constants.A_k) || !(constants.C3 > 0.0) ||
      !std::isfinite(constants.C3) || !(constants.C7 > 0.0) || !std::isfinite(constants.C7))
    throw DomainError("existence_budget: calibrated constants must be positive and finite");
  if (!(g_norm > 0.0) || !std::isfinite(g_norm))
    throw DomainError("existence_budget: data norm must be positive and finite");

  // Throws WindowError when k is outside the guaranteed local window.
  const ExponentSet pair = strichartz_pair_for_k(n, k, Regime::Local);
  const double k_over_p = k / pair.p;
  const double lift = 1.0 - k_over_p;

  Budget b;
  b.p = pair.p;
  b.q = pair.q;

  const double pow2 = std::pow(2.0, k - 1.0);
  b.alpha = 0.5 * (1.0 + (1.0 - 1.0 / pow2));
  b.M = b.alpha * pow2 * constants.A_k * g_norm / (pow2 - 1.0);
  b.t1 = (b.M - constants.A_k * g_norm) / (constants.C3 * std::pow(b.M, k));
  if (!(b.t1 > 0.0) || !std::isfinite(b.t1)) {
    std::ostringstream msg;
    msg << "existence_budget: reduced interval is not positive (M = " << b.M
        << ", A_k * g_norm = " << constants.A_k * g_norm << ")";
    throw InfeasibleError(msg.str());
  }
  if (!(lift > exponent_tol)) {
    std::ostringstream msg;
    msg << "existence_budget: time exponent 1 - k/p = " << lift
        << " is not positive (k/p reaches 1 at the closed window endpoint for n >= 6); "
           "no finite guaranteed interval can be formed";
    throw InfeasibleError(msg.str());
  }
  b.T1 = std::pow(b.t1, 1.0 / lift);

  // Re-check both contraction inequalities on the produced values.
  const double t_pow = std::pow(b.T1, lift);  // = t1 up to rounding
  const double absorb = constants.A_k * g_norm + constants.C3 * std::pow(b.M, k) * t_pow;
  if (!(absorb <= b.M * (1.0 + 1e-9))) {
    std::ostringstream msg;
    msg << "existence_budget: ball absorption fails post-hoc (" << absorb << " > " << b.M << ")";
    throw InfeasibleError(msg.str());
  }
  const double contraction = constants.C7 * std::pow(2.0 * b.M, k - 1.0) * t_pow;
  if (!(contraction < 1.0)) {
    std::ostringstream msg;
    msg << "existence_budget: contraction modulus " << contraction
        << " is not below 1; the supplied constants are mutually inconsistent (C7 exceeds "
           "what the C3-derived interval can absorb)";
    throw InfeasibleError(msg.str());
  }
  return b;
}

SweepResult lifespan_sweep(const Metric& metric, const GridSpec& grid,
                           const StatePair& data_template, const Nonlinearity& nl,
                           const std::vector<double>& epsilons, double horizon, int threads) {
  nl.validate();
  if (epsilons.empty()) throw ConfigError("lifespan_sweep: need at least one amplitude");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0.0) || !std::isfinite(epsilons[i]))
      throw ConfigError("lifespan_sweep: amplitudes must be positive and finite");
    if (i > 0 && !(epsilons[i] < epsilons[i - 1]))
      throw ConfigError("lifespan_sweep: amplitudes must be strictly decreasing");
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw ConfigError("lifespan_sweep: horizon must be positive and finite");

  // Unit normalization: the energy-pair norm when it is nonzero; spatially
  // constant templates carry no seminorm mass, so unit sup amplitude stands
  // in for them.
  const double en = energy_pair_norm(grid, data_template);
  if (en > 1e-9) {
    if (std::abs(en - 1.0) > 1e-6)
      throw ConfigError("lifespan_sweep: data template must have unit energy-pair norm");
  } else {
    const double sup_u = data_template.u.size() ? data_template.u.abs().maxCoeff() : 0.0;
    const double sup_v = data_template.v.size() ? data_template.v.abs().maxCoeff() : 0.0;
    if (std::abs(std::max(sup_u, sup_v) - 1.0) > 1e-6)
      throw ConfigError(
          "lifespan_sweep: constant-type data template must have unit sup amplitude");
  }

  SweepResult out;
  out.records.resize(epsilons.size());
  parallel_for(epsilons.size(), threads, [&](std::size_t i) {
    const double eps = epsilons[i];
    StatePair scaled;
    scaled.u = data_template.u * eps;
    scaled.v = data_template.v * eps;
    scaled.time = data_template.time;

    LifespanRecord rec;
    rec.epsilon = eps;
    PropagateOptions opt;
    opt.forcing = [&nl](int, double, const Field& u) { return nl.apply(u); };
    opt.throw_on_blowup = false;
    const PropagateResult res = propagate_run(metric, grid, scaled, 0.0, horizon, opt);
    if (res.blew_up) {
      rec.t_star = 0.5 * (res.last_safe_time + res.first_unstable_time);
      rec.censored = false;
      rec.iters_used = static_cast<int>(std::lround(res.last_safe_time / res.dt_used));
    } else {
      rec.t_star = horizon;
      rec.censored = true;
      rec.iters_used = res.steps_taken;
    }
    out.records[i] = rec;
  });

  // Log-log slope of the existence time over the uncensored records.
  std::vector<double> lx, ly;
  for (const LifespanRecord& r : out.records) {
    if (!r.censored && r.t_star > 0.0) {
      lx.push_back(std::log(r.epsilon));
      ly.push_back(std::log(r.t_star));
    }
  }
  if (lx.size() >= 2) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      mx += lx[i];
      my += ly[i];
    }
    mx /= static_cast<double>(lx.size());
    my /= static_cast<double>(lx.size());
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxx += (lx[i] - mx) * (lx[i] - mx);
      sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx > 0.0) out.slope_fit = sxy / sxx;
  }

  // Theoretical curve C eps^{-d}, anchored at the largest uncensored
  // amplitude so the lower-bound property is checkable below the anchor.
  double d = std::numeric_limits<double>::quiet_NaN();
  try {
    d = lifespan_exponent(grid.n, nl.k);
  } catch (const Error&) {
    // Outside the guaranteed theory (low dimension, endpoint power): the
    // theoretical columns stay NaN and only the measured fit is reported.
  }
  out.d_theory = d;
  if (std::isfinite(d)) {
    for (const LifespanRecord& r : out.records) {
      if (!r.censored) {
        out.anchor_coefficient = r.t_star * std::pow(r.epsilon, d);
        break;
      }
    }
    if (std::isfinite(out.anchor_coefficient)) {
      for (LifespanRecord& r : out.records)
        r.t1_theory = out.anchor_coefficient * std::pow(r.epsilon, -d);
    }
  }
  return out;
}

}  // namespace wavelab
