#include "wavelab/metric.hpp"

#include <algorithm>
#include <cmath>

namespace wavelab {

double bump_chi(double s) {
  if (std::abs(s) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

double bump_chi_prime(double s) {
  if (std::abs(s) >= 1.0) return 0.0;
  const double w = 1.0 - s * s;
  return -2.0 * s / (w * w) * std::exp(1.0 - 1.0 / w);
}

double smooth_plateau(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return 1.0 / (1.0 + std::exp(1.0 / s - 1.0 / (1.0 - s)));
}

const char* to_string(MetricFamily f) {
  switch (f) {
    case MetricFamily::Unit: return "unit";
    case MetricFamily::StaticBump: return "static_bump";
    case MetricFamily::PeriodicBump: return "periodic_bump";
    case MetricFamily::Custom: return "custom";
  }
  return "unknown";
}

namespace {

// Time modulation factor and its derivative for the periodic family.
double modulation(const Metric& m, double t) {
  if (m.family != MetricFamily::PeriodicBump || m.mod_depth == 0.0) return 1.0;
  return 1.0 + m.mod_depth * std::sin(2.0 * pi * t / m.period);
}

double modulation_dt(const Metric& m, double t) {
  if (m.family != MetricFamily::PeriodicBump || m.mod_depth == 0.0) return 0.0;
  const double omega = 2.0 * pi / m.period;
  return m.mod_depth * omega * std::cos(omega * t);
}

constexpr double fd_step = 1e-6;

}  // namespace

double Metric::value(double t, const Vec& x) const {
  switch (family) {
    case MetricFamily::Unit:
      return 1.0;
    case MetricFamily::StaticBump:
      return 1.0 + amplitude * bump_chi(x.norm() / rho);
    case MetricFamily::PeriodicBump:
      return 1.0 + amplitude * modulation(*this, t) * bump_chi(x.norm() / rho);
    case MetricFamily::Custom:
      return custom_value(t, x);
  }
  return 1.0;
}

double Metric::dt_value(double t, const Vec& x) const {
  switch (family) {
    case MetricFamily::Unit:
    case MetricFamily::StaticBump:
      return 0.0;
    case MetricFamily::PeriodicBump:
      return amplitude * modulation_dt(*this, t) * bump_chi(x.norm() / rho);
    case MetricFamily::Custom:
      if (custom_dt) return custom_dt(t, x);
      return (custom_value(t + fd_step, x) - custom_value(t - fd_step, x)) / (2.0 * fd_step);
  }
  return 0.0;
}

Vec Metric::grad_value(double t, const Vec& x) const {
  switch (family) {
    case MetricFamily::Unit:
      return Vec::Zero(x.size());
    case MetricFamily::StaticBump:
    case MetricFamily::PeriodicBump: {
      const double r = x.norm();
      if (r < 1e-12 || r >= rho) return Vec::Zero(x.size());
      const double factor =
          amplitude * modulation(*this, t) * bump_chi_prime(r / rho) / (rho * r);
      return factor * x;
    }
    case MetricFamily::Custom: {
      if (custom_grad) return custom_grad(t, x);
      Vec g(x.size());
      Vec xp = x;
      for (int d = 0; d < x.size(); ++d) {
        xp[d] = x[d] + fd_step;
        const double hi = custom_value(t, xp);
        xp[d] = x[d] - fd_step;
        const double lo = custom_value(t, xp);
        xp[d] = x[d];
        g[d] = (hi - lo) / (2.0 * fd_step);
      }
      return g;
    }
  }
  return Vec::Zero(x.size());
}

MetricSample Metric::sample(double t, const Vec& x) const {
  MetricSample s;
  s.value = value(t, x);
  s.dt_value = dt_value(t, x);
  s.grad_value = grad_value(t, x);
  return s;
}

bool Metric::time_dependent() const {
  switch (family) {
    case MetricFamily::Unit:
    case MetricFamily::StaticBump:
      return false;
    case MetricFamily::PeriodicBump:
      return amplitude != 0.0 && mod_depth != 0.0;
    case MetricFamily::Custom:
      // period = 0 is the constructor's declaration of time independence
      return period > 0.0;
  }
  return false;
}

Metric make_unit_metric(double rho) {
  if (!(rho > 0.0)) throw DomainError("make_unit_metric: rho must be positive");
  Metric m;
  m.family = MetricFamily::Unit;
  m.rho = rho;
  return m;
}

Metric make_static_bump(double amplitude, double rho) {
  if (!(rho > 0.0)) throw DomainError("make_static_bump: rho must be positive");
  if (!(amplitude > -1.0))
    throw DomainError("make_static_bump: amplitude must exceed -1 so that inf a > 0");
  Metric m;
  m.family = MetricFamily::StaticBump;
  m.rho = rho;
  m.amplitude = amplitude;
  m.c0 = 1.0 + std::min(0.0, amplitude);
  m.C0 = 1.0 + std::max(0.0, amplitude);
  return m;
}

Metric make_periodic_bump(double amplitude, double rho, double period, double mod_depth) {
  if (!(rho > 0.0)) throw DomainError("make_periodic_bump: rho must be positive");
  if (!(period > 0.0)) throw DomainError("make_periodic_bump: period must be positive");
  if (!(amplitude > -1.0)) throw DomainError("make_periodic_bump: amplitude must exceed -1");
  if (mod_depth < 0.0 || mod_depth >= 1.0)
    throw DomainError("make_periodic_bump: mod_depth must lie in [0, 1)");
  const double swing = amplitude * (1.0 + mod_depth);
  if (!(1.0 + std::min(0.0, swing) > 0.0))
    throw DomainError("make_periodic_bump: parameters drive inf a to 0 or below");
  Metric m;
  m.family = MetricFamily::PeriodicBump;
  m.rho = rho;
  m.period = period;
  m.amplitude = amplitude;
  m.mod_depth = mod_depth;
  m.c0 = 1.0 + std::min(0.0, swing);
  m.C0 = 1.0 + std::max(0.0, swing);
  return m;
}

Metric make_custom_metric(std::function<double(double, const Vec&)> value, double rho,
                          double period, double c0_claim, double C0_claim,
                          std::function<double(double, const Vec&)> dt,
                          std::function<Vec(double, const Vec&)> grad) {
  if (!value) throw DomainError("make_custom_metric: value callable is required");
  if (!(rho > 0.0)) throw DomainError("make_custom_metric: rho must be positive");
  if (period < 0.0) throw DomainError("make_custom_metric: period must be >= 0");
  if (!(c0_claim > 0.0) || C0_claim < c0_claim)
    throw DomainError("make_custom_metric: need 0 < c0 <= C0");
  Metric m;
  m.family = MetricFamily::Custom;
  m.rho = rho;
  m.period = period;
  m.c0 = c0_claim;
  m.C0 = C0_claim;
  m.custom_value = std::move(value);
  m.custom_dt = std::move(dt);
  m.custom_grad = std::move(grad);
  m.fd_fallback = !(m.custom_dt && m.custom_grad);
  return m;
}

Field coefficient_field(const Metric& metric, const GridSpec& grid, double t) {
  switch (metric.family) {
    case MetricFamily::Unit:
      return Field::Ones(grid.node_count());
    case MetricFamily::StaticBump:
    case MetricFamily::PeriodicBump: {
      const Field s = radial_distance_field(grid) / metric.rho;
      const double scale = metric.amplitude * modulation(metric, t);
      return 1.0 + scale * s.unaryExpr([](double v) { return bump_chi(v); });
    }
    case MetricFamily::Custom: {
      Field out(grid.node_count());
      for (std::size_t i = 0; i < static_cast<std::size_t>(out.size()); ++i)
        out[i] = metric.value(t, node_position(grid, i));
      return out;
    }
  }
  return Field::Ones(grid.node_count());
}

Field coefficient_dt_field(const Metric& metric, const GridSpec& grid, double t) {
  switch (metric.family) {
    case MetricFamily::Unit:
    case MetricFamily::StaticBump:
      return Field::Zero(grid.node_count());
    case MetricFamily::PeriodicBump: {
      const Field s = radial_distance_field(grid) / metric.rho;
      const double scale = metric.amplitude * modulation_dt(metric, t);
      return scale * s.unaryExpr([](double v) { return bump_chi(v); });
    }
    case MetricFamily::Custom: {
      Field out(grid.node_count());
      for (std::size_t i = 0; i < static_cast<std::size_t>(out.size()); ++i)
        out[i] = metric.dt_value(t, node_position(grid, i));
      return out;
    }
  }
  return Field::Zero(grid.node_count());
}

ValidationReport validate(const Metric& metric, const GridSpec& grid, int n_time_samples) {
  grid.check();
  if (n_time_samples < 1) throw DomainError("validate: need at least one time sample");
  if (grid.kind == GridKind::Full && grid.extent < metric.rho)
    throw DomainError("validate: grid must cover the ball |x| <= rho");
  if (grid.kind == GridKind::Radial && grid.extent < metric.rho)
    throw DomainError("validate: grid must cover the ball |x| <= rho");

  ValidationReport report;
  report.fd_fallback = metric.fd_fallback;
  report.min_value = std::numeric_limits<double>::infinity();
  report.max_value = -std::numeric_limits<double>::infinity();

  const std::size_t count = grid.node_count();
  const bool periodic = metric.period > 0.0;
  const double t_span = periodic ? metric.period : 1.0;
  const int nt = metric.time_dependent() || periodic ? n_time_samples : 1;

  for (int it = 0; it < nt; ++it) {
    const double t = (nt == 1) ? 0.0 : t_span * it / nt;
    for (std::size_t i = 0; i < count; ++i) {
      const Vec x = node_position(grid, i);
      const double a = metric.value(t, x);
      report.min_value = std::min(report.min_value, a);
      report.max_value = std::max(report.max_value, a);
      if (x.norm() >= metric.rho)
        report.max_support_violation = std::max(report.max_support_violation, std::abs(a - 1.0));
      if (periodic) {
        const double defect = std::abs(metric.value(t + metric.period, x) - a);
        report.max_periodicity_defect = std::max(report.max_periodicity_defect, defect);
      }
    }
  }

  report.positivity_violation = !(report.min_value > 0.0);
  report.c0_violation = report.min_value < metric.c0 - 1e-12;
  report.C0_violation = report.max_value > metric.C0 + 1e-12;
  return report;
}

}  // namespace wavelab
