#include "wavelab/rays.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace wavelab {
namespace {

constexpr double launch_constraint_tol = 1e-10;

struct Deriv {
  double dt = 0.0;
  Vec dx;
  double dtau = 0.0;
  Vec dxi;
};

Deriv rhs(const Metric& metric, const RayState& s) {
  const MetricSample a = metric.sample(s.t, s.x);
  const double xi2 = s.xi.squaredNorm();
  Deriv d;
  d.dt = 2.0 * s.tau;
  d.dx = (-2.0 * a.value) * s.xi;
  d.dtau = xi2 * a.dt_value;
  d.dxi = xi2 * a.grad_value;
  return d;
}

RayState euler_probe(const RayState& s, const Deriv& d, double h) {
  RayState r;
  r.t = s.t + h * d.dt;
  r.x = s.x + h * d.dx;
  r.tau = s.tau + h * d.dtau;
  r.xi = s.xi + h * d.dxi;
  r.sigma = s.sigma + h;
  return r;
}

RayState rk4_step(const Metric& metric, const RayState& s, double h) {
  const Deriv k1 = rhs(metric, s);
  const Deriv k2 = rhs(metric, euler_probe(s, k1, 0.5 * h));
  const Deriv k3 = rhs(metric, euler_probe(s, k2, 0.5 * h));
  const Deriv k4 = rhs(metric, euler_probe(s, k3, h));
  const double w = h / 6.0;
  RayState r;
  r.t = s.t + w * (k1.dt + 2.0 * k2.dt + 2.0 * k3.dt + k4.dt);
  r.x = s.x + w * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
  r.tau = s.tau + w * (k1.dtau + 2.0 * k2.dtau + 2.0 * k3.dtau + k4.dtau);
  r.xi = s.xi + w * (k1.dxi + 2.0 * k2.dxi + 2.0 * k3.dxi + k4.dxi);
  r.sigma = s.sigma + h;
  return r;
}

/// Escape needs outgoing radial motion: x . dx/dsigma = -2a (x . xi) > 0,
/// i.e. x . xi < 0 (the coefficient is positive).
bool outgoing(const RayState& s) { return s.x.dot(s.xi) < 0.0; }

void validate_radii(const std::vector<double>& radii, bool require_ascending) {
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0) || !std::isfinite(radii[i]))
      throw DomainError("escape radii must be positive and finite");
    if (require_ascending && i > 0 && !(radii[i] > radii[i - 1]))
      throw DomainError("escape radii must be strictly ascending");
  }
}

Trajectory trace_impl(const Metric& metric, const RayState& initial, double sigma_max,
                      double step, const std::vector<double>& radii, bool record_samples) {
  if (!(sigma_max > 0.0) || !std::isfinite(sigma_max))
    throw DomainError("trace_ray: sigma_max must be positive and finite");
  if (!(step > 0.0) || !std::isfinite(step))
    throw DomainError("trace_ray: step must be positive and finite");
  if (initial.x.size() == 0 || initial.x.size() != initial.xi.size())
    throw DomainError("trace_ray: position and frequency dimensions disagree");
  if (!(initial.tau > 0.0))
    throw DomainError("trace_ray: launch requires tau > 0 (forward-in-time convention)");
  if (initial.x.norm() > metric.rho * (1.0 + 1e-12) + 1e-12)
    throw DomainError("trace_ray: launch position lies outside the coefficient support");
  if (initial.constraint_residual(metric) > launch_constraint_tol)
    throw DomainError("trace_ray: launch state violates the null constraint");
  validate_radii(radii, /*require_ascending=*/false);

  Trajectory traj;
  traj.step = step;
  traj.radii = radii;
  traj.escape_sigma.assign(radii.size(), std::numeric_limits<double>::quiet_NaN());

  RayState cur = initial;
  traj.max_drift = cur.constraint_residual(metric);
  if (record_samples) traj.samples.push_back(cur);

  auto check_escapes = [&](const RayState& prev, const RayState& now, bool at_launch) {
    if (!outgoing(now)) return;
    const double r_now = now.x.norm();
    for (std::size_t i = 0; i < radii.size(); ++i) {
      if (!std::isnan(traj.escape_sigma[i])) continue;
      if (!(r_now > radii[i])) continue;
      if (at_launch) {
        traj.escape_sigma[i] = now.sigma;
        continue;
      }
      const double r_prev = prev.x.norm();
      if (r_prev <= radii[i] && r_now > r_prev) {
        // Radius crossed during this level: locate it linearly in |x|.
        const double frac = (radii[i] - r_prev) / (r_now - r_prev);
        traj.escape_sigma[i] = prev.sigma + frac * (now.sigma - prev.sigma);
      } else {
        // Already beyond the radius; the outgoing condition arrived here.
        traj.escape_sigma[i] = now.sigma;
      }
    }
  };

  check_escapes(cur, cur, /*at_launch=*/true);

  const double sigma_end = initial.sigma + sigma_max;
  while (cur.sigma < sigma_end - 1e-12 * sigma_max) {
    const double h = std::min(step, sigma_end - cur.sigma);
    RayState next = rk4_step(metric, cur, h);
    const double drift = next.constraint_residual(metric);
    traj.max_drift = std::max(traj.max_drift, drift);
    if (drift > ray_drift_tol) {
      std::ostringstream msg;
      msg << "trace_ray: null-constraint residual " << drift << " exceeds " << ray_drift_tol
          << " at sigma = " << next.sigma << "; reduce the step";
      throw ConstraintDriftError(msg.str());
    }
    check_escapes(cur, next, /*at_launch=*/false);
    if (record_samples) traj.samples.push_back(next);
    cur = std::move(next);
  }
  if (!record_samples) traj.samples.push_back(cur);  // keep the terminal state
  return traj;
}

/// Radical-inverse (van der Corput) sequence in the given base.
double radical_inverse(std::uint64_t i, std::uint64_t base) {
  double inv = 1.0 / static_cast<double>(base);
  double scale = inv;
  double value = 0.0;
  while (i > 0) {
    value += static_cast<double>(i % base) * scale;
    i /= base;
    scale *= inv;
  }
  return value;
}

/// k-th of m low-discrepancy unit directions: antipodal pair in 1d, equal
/// angles in 2d, a Fibonacci lattice on the sphere in 3d, and a fixed-seed
/// Gaussian draw (independent of the scan seed) in higher dimensions.
Vec unit_direction(int n, int k, int m) {
  Vec d(n);
  if (n == 1) {
    d[0] = (k % 2 == 0) ? 1.0 : -1.0;
    return d;
  }
  if (n == 2) {
    const double angle = 2.0 * pi * (k + 0.5) / m;
    d[0] = std::cos(angle);
    d[1] = std::sin(angle);
    return d;
  }
  if (n == 3) {
    const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
    const double z = 1.0 - 2.0 * (k + 0.5) / m;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = 2.0 * pi * golden * k;
    d[0] = r * std::cos(phi);
    d[1] = r * std::sin(phi);
    d[2] = z;
    return d;
  }
  std::mt19937_64 gen = rng_for(0x5ca1ab1eULL, static_cast<std::uint64_t>(k));
  std::normal_distribution<double> gauss(0.0, 1.0);
  double norm2 = 0.0;
  do {
    for (int j = 0; j < n; ++j) d[j] = gauss(gen);
    norm2 = d.squaredNorm();
  } while (norm2 < 1e-12);
  return d / std::sqrt(norm2);
}

}  // namespace

double RayState::hamiltonian(const Metric& metric) const {
  return tau * tau - metric.value(t, x) * xi.squaredNorm();
}

double RayState::constraint_residual(const Metric& metric) const {
  const double kinetic = metric.value(t, x) * xi.squaredNorm();
  const double denom = tau * tau + kinetic;
  if (denom == 0.0) return 0.0;
  return std::abs(tau * tau - kinetic) / denom;
}

RayState make_null_ray(const Metric& metric, double t, const Vec& x, const Vec& direction) {
  if (x.size() == 0 || x.size() != direction.size())
    throw DomainError("make_null_ray: position and direction dimensions disagree");
  const double dn = direction.norm();
  if (!(dn > 0.0) || !std::isfinite(dn))
    throw DomainError("make_null_ray: direction must be nonzero and finite");
  RayState s;
  s.t = t;
  s.x = x;
  s.xi = direction / dn;
  s.tau = std::sqrt(metric.value(t, x));
  s.sigma = 0.0;
  return s;
}

double Trajectory::escape_at(double R) const {
  for (std::size_t i = 0; i < radii.size(); ++i)
    if (radii[i] == R) return escape_sigma[i];
  throw DomainError("Trajectory::escape_at: radius was not traced");
}

Trajectory trace_ray(const Metric& metric, const RayState& initial, double sigma_max,
                     double step, const std::vector<double>& radii) {
  return trace_impl(metric, initial, sigma_max, step, radii, /*record_samples=*/true);
}

const char* to_string(TrapVerdict v) {
  switch (v) {
    case TrapVerdict::NonTrapping: return "non_trapping";
    case TrapVerdict::TrappingSuspected: return "trapping_suspected";
    case TrapVerdict::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

EscapeTable nontrapping_scan(const Metric& metric, const std::vector<double>& R_values,
                             const ScanConfig& config) {
  if (R_values.empty()) throw DomainError("nontrapping_scan: no escape radii requested");
  validate_radii(R_values, /*require_ascending=*/true);
  if (config.n < 1) throw ConfigError("nontrapping_scan: dimension must be at least 1");
  if (config.n_rays < 2) throw ConfigError("nontrapping_scan: at least 2 rays required");
  if (!(config.sigma_max > 0.0) || !std::isfinite(config.sigma_max))
    throw ConfigError("nontrapping_scan: sigma_max must be positive and finite");
  if (!(config.step > 0.0) || !std::isfinite(config.step))
    throw ConfigError("nontrapping_scan: step must be positive and finite");

  const int n = config.n;
  const int n_rays = config.n_rays;
  const int strata = std::max(1, n_rays - 2);

  // Launch states. Two probes are pinned: the worst boundary ray (|x| = rho
  // heading straight inward through the centre; in the unit coefficient it
  // realises the largest escape parameter (rho + R) / 2) and the central ray.
  // On the tau > 0 sheet the group velocity is -a xi / tau, antiparallel to
  // the frequency, so "inward motion" means an outward-pointing xi. The
  // remaining fan is volume-stratified in radius with low-discrepancy
  // directions; the seeded jitter decorrelates frequencies from positions.
  std::vector<RayState> launches(n_rays);
  for (int i = 0; i < n_rays; ++i) {
    Vec pos, dir;
    double t0 = 0.0;
    if (i == 0) {
      pos = metric.rho * unit_direction(n, 0, strata);
      dir = unit_direction(n, 0, strata);
    } else if (i == 1) {
      pos = Vec::Zero(n);
      dir = unit_direction(n, 0, strata);
    } else {
      const int j = i - 2;
      const double frac =
          std::pow((j + 0.5) / strata, 1.0 / n);  // volume-uniform radii in [0, 1)
      pos = (metric.rho * frac) * unit_direction(n, j, strata);
      dir = unit_direction(n, strata - 1 - j, strata);
      std::mt19937_64 gen = rng_for(config.seed, static_cast<std::uint64_t>(j));
      std::normal_distribution<double> gauss(0.0, 1.0);
      Vec jitter(n);
      for (int c = 0; c < n; ++c) jitter[c] = gauss(gen);
      dir = dir + 0.35 * jitter;
      if (dir.norm() < 1e-9) dir = unit_direction(n, j, strata);  // jitter cancelled it
      if (metric.time_dependent() && metric.period > 0.0)
        t0 = metric.period * radical_inverse(static_cast<std::uint64_t>(j) + 1, 3);
    }
    launches[i] = make_null_ray(metric, t0, pos, dir);
  }

  struct RayOutcome {
    std::vector<double> escape_sigma;
    double drift = 0.0;
    bool drifted = false;
  };
  std::vector<RayOutcome> outcomes(n_rays);

  const int threads = config.threads > 0 ? config.threads : default_thread_count();
  parallel_for(static_cast<std::size_t>(n_rays), threads, [&](std::size_t i) {
    try {
      Trajectory traj = trace_impl(metric, launches[i], config.sigma_max, config.step, R_values,
                                   /*record_samples=*/false);
      outcomes[i].escape_sigma = std::move(traj.escape_sigma);
      outcomes[i].drift = traj.max_drift;
    } catch (const ConstraintDriftError&) {
      outcomes[i].drifted = true;
    }
  });

  EscapeTable table;
  table.R_values = R_values;
  table.rays_launched = n_rays;
  table.sigma_max = config.sigma_max;
  table.seed = config.seed;
  table.S_R.assign(R_values.size(), std::numeric_limits<double>::quiet_NaN());
  table.escaped_rays.assign(R_values.size(), 0);

  int surviving = 0;
  double max_observed = 0.0;
  bool any_escape = false;
  for (const RayOutcome& out : outcomes) {
    if (out.drifted) {
      ++table.rays_drifted;
      continue;
    }
    ++surviving;
    table.max_drift = std::max(table.max_drift, out.drift);
    for (std::size_t r = 0; r < R_values.size(); ++r) {
      if (!std::isnan(out.escape_sigma[r])) {
        ++table.escaped_rays[r];
        any_escape = true;
        max_observed = std::max(max_observed, out.escape_sigma[r]);
      }
    }
  }

  bool all_escaped = surviving > 0;
  for (std::size_t r = 0; r < R_values.size(); ++r) {
    if (table.escaped_rays[r] == surviving && surviving > 0) {
      double worst = 0.0;
      for (const RayOutcome& out : outcomes)
        if (!out.drifted) worst = std::max(worst, out.escape_sigma[r]);
      table.S_R[r] = worst;
    } else {
      all_escaped = false;
    }
  }

  if (table.rays_drifted > 0.01 * n_rays) {
    table.verdict = TrapVerdict::Inconclusive;
  } else if (all_escaped) {
    table.verdict = TrapVerdict::NonTrapping;
  } else if (any_escape && config.sigma_max >= 2.0 * max_observed) {
    // Generous budget: the stragglers had twice the parameter any escaping
    // ray needed, yet stayed inside. That points at trapped rays rather than
    // a short scan.
    table.verdict = TrapVerdict::TrappingSuspected;
  } else {
    table.verdict = TrapVerdict::Inconclusive;
  }
  return table;
}

}  // namespace wavelab
