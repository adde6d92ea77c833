#include "wavelab/propagate.hpp"

#include <cmath>
#include <sstream>

namespace wavelab {

double cfl_dt(const GridSpec& grid, const Metric& metric) {
  return cfl_safety * grid.h() / std::sqrt(static_cast<double>(grid.n) * metric.C0);
}

DivAGradOp::DivAGradOp(const Metric& metric, const GridSpec& grid)
    : metric_(metric), grid_(grid) {
  grid_.check();
  time_dependent_ = metric_.time_dependent();

  if (grid_.kind == GridKind::Radial) {
    const double h = grid_.h();
    const int m = grid_.points_per_axis;
    geom_plus_.resize(m);
    geom_minus_.resize(m);
    for (int i = 0; i < m; ++i) {
      const double r_lo = i * h;
      const double r_hi = (i + 1) * h;
      const double vol = (std::pow(r_hi, grid_.n) - std::pow(r_lo, grid_.n)) / grid_.n;
      geom_plus_[i] = std::pow(r_hi, grid_.n - 1) / (vol * h);
      geom_minus_[i] = std::pow(r_lo, grid_.n - 1) / (vol * h);
    }
    faces_.resize(1);
  } else {
    faces_.resize(grid_.n);
  }
}

void DivAGradOp::refresh(double t) {
  if (refreshed_once_ && (!time_dependent_ || t == cached_t_)) return;
  nodes_ = coefficient_field(metric_, grid_, t);

  const int m = grid_.points_per_axis;
  if (grid_.kind == GridKind::Radial) {
    Field& fa = faces_[0];
    fa.resize(m);
    for (int i = 0; i + 1 < m; ++i) fa[i] = 0.5 * (nodes_[i] + nodes_[i + 1]);
    fa[m - 1] = 0.5 * (nodes_[m - 1] + 1.0);  // ghost outside the box: a = 1
  } else {
    const std::size_t count = grid_.node_count();
    const bool per = grid_.boundary == Boundary::Periodic;
    std::size_t stride = count / m;  // stride of axis 0
    for (int axis = 0; axis < grid_.n; ++axis) {
      Field& fa = faces_[axis];
      fa.resize(count);
      const std::size_t block = stride * m;
      for (std::size_t base = 0; base < count; base += block) {
        for (std::size_t inner = 0; inner < stride; ++inner) {
          const std::size_t line = base + inner;
          for (int k = 0; k + 1 < m; ++k) {
            const std::size_t idx = line + k * stride;
            fa[idx] = 0.5 * (nodes_[idx] + nodes_[idx + stride]);
          }
          const std::size_t last = line + (m - 1) * stride;
          fa[last] = per ? 0.5 * (nodes_[last] + nodes_[line]) : 0.5 * (nodes_[last] + 1.0);
        }
      }
      stride /= m;
    }
  }
  refreshed_once_ = true;
  cached_t_ = t;
}

const Field& DivAGradOp::node_coefficients(double t) {
  refresh(t);
  return nodes_;
}

void DivAGradOp::apply(double t, const Field& u, Field& out) {
  refresh(t);
  const std::size_t count = grid_.node_count();
  if (static_cast<std::size_t>(u.size()) != count)
    throw DomainError("DivAGradOp: field does not match the grid");
  out.setZero(count);

  const int m = grid_.points_per_axis;
  if (grid_.kind == GridKind::Radial) {
    const Field& fa = faces_[0];
    for (int i = 0; i < m; ++i) {
      const double up = (i + 1 < m) ? u[i + 1] : 0.0;
      const double flux_out = fa[i] * (up - u[i]) * geom_plus_[i];
      const double flux_in = (i > 0) ? fa[i - 1] * (u[i] - u[i - 1]) * geom_minus_[i] : 0.0;
      out[i] = flux_out - flux_in;
    }
    return;
  }

  const bool per = grid_.boundary == Boundary::Periodic;
  const double inv_h2 = 1.0 / (grid_.h() * grid_.h());
  std::size_t stride = count / m;
  for (int axis = 0; axis < grid_.n; ++axis) {
    const Field& fa = faces_[axis];
    const std::size_t block = stride * m;
    for (std::size_t base = 0; base < count; base += block) {
      for (std::size_t inner = 0; inner < stride; ++inner) {
        const std::size_t line = base + inner;
        const std::size_t wrap_last = line + (m - 1) * stride;
        for (int k = 0; k < m; ++k) {
          const std::size_t idx = line + k * stride;
          double up, fm, um;
          const double fp = fa[idx];
          if (k + 1 < m) {
            up = u[idx + stride];
          } else {
            up = per ? u[line] : 0.0;
          }
          if (k > 0) {
            um = u[idx - stride];
            fm = fa[idx - stride];
          } else if (per) {
            um = u[wrap_last];
            fm = fa[wrap_last];
          } else {
            um = 0.0;
            fm = 0.5 * (nodes_[idx] + 1.0);
          }
          out[idx] += (fp * (up - u[idx]) - fm * (u[idx] - um)) * inv_h2;
        }
      }
    }
    stride /= m;
  }
}

namespace {

struct StepPlan {
  int steps = 0;
  double dt = 0.0;
};

StepPlan plan_steps(const GridSpec& grid, const Metric& metric, double span) {
  StepPlan plan;
  if (span == 0.0) return plan;
  const double bound = cfl_dt(grid, metric);
  if (grid.dt > 0.0) {
    if (grid.dt > bound * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "propagate: dt=" << grid.dt << " exceeds the stability bound " << bound;
      throw CflError(msg.str());
    }
    const double raw = span / grid.dt;
    plan.steps = static_cast<int>(std::lround(raw));
    if (plan.steps < 1 || std::abs(raw - plan.steps) > 1e-9 * std::max(1.0, raw))
      throw ConfigError("propagate: time span is not a whole number of steps of grid.dt");
    plan.dt = grid.dt;
  } else {
    plan.steps = std::max(1, static_cast<int>(std::ceil(span / bound - 1e-12)));
    plan.dt = span / plan.steps;
  }
  return plan;
}

}  // namespace

PropagateResult propagate_run(const Metric& metric, const GridSpec& grid, const StatePair& state,
                              double s, double t, const PropagateOptions& options) {
  grid.check();
  if (t < s) throw DomainError("propagate: t must be >= s");
  const std::size_t count = grid.node_count();
  if (static_cast<std::size_t>(state.u.size()) != count ||
      static_cast<std::size_t>(state.v.size()) != count)
    throw DomainError("propagate: state fields do not match the grid");

  const StepPlan plan = plan_steps(grid, metric, t - s);
  PropagateResult res;
  res.dt_used = plan.dt;

  if (plan.steps == 0) {
    if (options.observer) options.observer(0, s, state.u, state.v);
    res.state = state;
    res.state.time = t;
    return res;
  }

  const double dt = plan.dt;
  const bool has_f = static_cast<bool>(options.forcing);
  const double threshold = options.blowup_threshold;
  auto is_bad = [threshold](const Field& x) {
    return !x.allFinite() || x.abs().maxCoeff() > threshold;
  };

  DivAGradOp L(metric, grid);
  Field lap(count), F, u_next(count), vel(count);
  Field u_prev = state.u;
  Field u_curr(count);

  auto finish_blowup = [&](int level, const Field& u_safe, const Field& v_safe) {
    res.blew_up = true;
    res.last_safe_time = s + dt * level;
    res.first_unstable_time = s + dt * (level + 1);
    res.state = StatePair{u_safe, v_safe, res.last_safe_time};
    res.steps_taken = level;
    if (options.throw_on_blowup) {
      std::ostringstream msg;
      msg << "field exceeded " << threshold << " between t=" << res.last_safe_time << " and t="
          << res.first_unstable_time;
      throw BlowupError(msg.str(), res.last_safe_time, res.first_unstable_time);
    }
  };

  // Bootstrap level 0 -> 1 with the second-order Taylor start.
  L.apply(s, u_prev, lap);
  if (has_f) {
    F = options.forcing(0, s, u_prev);
    lap += F;
  }
  if (options.observer) options.observer(0, s, u_prev, state.v);
  u_curr = u_prev + dt * state.v + (0.5 * dt * dt) * lap;
  if (is_bad(u_curr)) {
    finish_blowup(0, u_prev, state.v);
    return res;
  }

  for (int level = 1; level < plan.steps; ++level) {
    const double tl = s + dt * level;
    L.apply(tl, u_curr, lap);
    if (has_f) {
      F = options.forcing(level, tl, u_curr);
      lap += F;
    }
    u_next = 2.0 * u_curr - u_prev + (dt * dt) * lap;
    if (is_bad(u_next)) {
      // Backward-in-time velocity at the last safe level.
      vel = (u_curr - u_prev) / dt + (0.5 * dt) * lap;
      if (options.observer) options.observer(level, tl, u_curr, vel);
      finish_blowup(level, u_curr, vel);
      return res;
    }
    if (options.observer) {
      vel = (u_next - u_prev) / (2.0 * dt);
      options.observer(level, tl, u_curr, vel);
    }
    u_prev.swap(u_curr);
    u_curr.swap(u_next);
  }

  const double tM = s + dt * plan.steps;
  L.apply(tM, u_curr, lap);
  if (has_f) {
    F = options.forcing(plan.steps, tM, u_curr);
    lap += F;
  }
  vel = (u_curr - u_prev) / dt + (0.5 * dt) * lap;
  if (options.observer) options.observer(plan.steps, tM, u_curr, vel);
  res.state = StatePair{std::move(u_curr), std::move(vel), tM};
  res.steps_taken = plan.steps;
  return res;
}

StatePair propagate(const Metric& metric, const GridSpec& grid, const StatePair& state, double s,
                    double t, const PropagateOptions& options) {
  PropagateOptions opts = options;
  opts.throw_on_blowup = true;
  return propagate_run(metric, grid, state, s, t, opts).state;
}

StatePair duhamel_term(const Metric& metric, const SourceSeries& h, double t) {
  if (!(h.dt > 0.0)) throw ConfigError("duhamel_term: source series needs dt > 0");
  if (h.f.empty()) throw ConfigError("duhamel_term: empty source series");
  const double raw = t / h.dt;
  const int steps = static_cast<int>(std::lround(raw));
  if (steps < 0 || std::abs(raw - steps) > 1e-9 * std::max(1.0, std::abs(raw)))
    throw ConfigError("duhamel_term: t is not on the source time grid");
  if (static_cast<std::size_t>(steps) >= h.f.size())
    throw ConfigError("duhamel_term: source series is shorter than t");

  GridSpec grid = h.grid;
  grid.dt = h.dt;
  const std::size_t count = grid.node_count();
  for (const Field& f : h.f)
    if (static_cast<std::size_t>(f.size()) != count)
      throw ConfigError("duhamel_term: source fields do not match the grid");

  StatePair zero{Field::Zero(count), Field::Zero(count), 0.0};
  if (steps == 0) return zero;

  PropagateOptions opts;
  opts.forcing = [&h](int level, double, const Field&) { return h.f[level]; };
  return propagate(metric, grid, zero, 0.0, t, opts);
}

History propagate_history(const Metric& metric, const GridSpec& grid, const StatePair& state,
                          double s, double t, const PropagateOptions& options) {
  History hist;
  hist.grid = grid;
  hist.t0 = s;
  PropagateOptions opts = options;
  opts.observer = [&](int level, double tt, const Field& u, const Field& v) {
    if (options.observer) options.observer(level, tt, u, v);
    hist.u.push_back(u);
    hist.v.push_back(v);
  };
  const PropagateResult res = propagate_run(metric, grid, state, s, t, opts);
  hist.dt = res.dt_used;
  return hist;
}

}  // namespace wavelab
