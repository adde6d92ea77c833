#include "wavelab/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "wavelab/exponents.hpp"
#include "wavelab/norms.hpp"
#include "wavelab/propagate.hpp"

namespace wavelab {

namespace {

double packet_envelope(double s, double sigma) {
  return std::exp(-0.5 * s * s / (sigma * sigma)) * bump_chi(s / (4.0 * sigma));
}

struct Packet {
  double amplitude, sigma, freq, phase;
  Vec center;
  Vec direction;
};

Packet draw_packet(const GridSpec& grid, const PacketBand& band, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Packet p;
  p.amplitude = 2.0 * unit(rng) - 1.0;
  p.sigma = band.sigma_lo + (band.sigma_hi - band.sigma_lo) * unit(rng);
  p.freq = band.freq_lo + (band.freq_hi - band.freq_lo) * unit(rng);
  p.phase = 2.0 * pi * unit(rng);

  if (grid.kind == GridKind::Radial) {
    p.center = Vec::Constant(1, band.center_radius * unit(rng));
    p.direction = Vec::Ones(1);
    return p;
  }
  p.center = Vec(grid.n);
  do {
    for (int d = 0; d < grid.n; ++d) p.center[d] = band.center_radius * (2.0 * unit(rng) - 1.0);
  } while (p.center.norm() > band.center_radius);
  std::normal_distribution<double> gauss(0.0, 1.0);
  do {
    p.direction = Vec::NullaryExpr(grid.n, [&](Eigen::Index) { return gauss(rng); });
  } while (p.direction.norm() < 1e-6);
  p.direction.normalize();
  return p;
}

}  // namespace

Field random_packet_field(const GridSpec& grid, const PacketBand& band, std::uint64_t seed) {
  grid.check();
  if (band.count < 1 || band.center_radius <= 0.0 || band.sigma_lo <= 0.0 ||
      band.sigma_hi < band.sigma_lo || band.freq_hi < band.freq_lo)
    throw ConfigError("random_packet_field: malformed packet band");

  std::mt19937_64 rng = rng_for(seed, 0);
  const std::size_t count = grid.node_count();
  Field f = Field::Zero(count);

  for (int j = 0; j < band.count; ++j) {
    const Packet p = draw_packet(grid, band, rng);
    if (grid.kind == GridKind::Radial) {
      for (int i = 0; i < grid.points_per_axis; ++i) {
        const double s = grid.radius(i) - p.center[0];
        f[i] += p.amplitude * packet_envelope(s, p.sigma) * std::cos(p.freq * s + p.phase);
      }
    } else {
      std::vector<Field> coords(grid.n);
      for (int d = 0; d < grid.n; ++d) coords[d] = coordinate_field(grid, d);
      for (std::size_t i = 0; i < count; ++i) {
        double dist2 = 0.0, along = 0.0;
        for (int d = 0; d < grid.n; ++d) {
          const double s = coords[d][i] - p.center[d];
          dist2 += s * s;
          along += s * p.direction[d];
        }
        f[i] += p.amplitude * packet_envelope(std::sqrt(dist2), p.sigma) *
                std::cos(p.freq * along + p.phase);
      }
    }
  }
  return f;
}

StatePair random_packet_data(const GridSpec& grid, const PacketBand& band, std::uint64_t seed) {
  StatePair s;
  s.u = random_packet_field(grid, band, mix_seed(seed, 1));
  s.v = random_packet_field(grid, band, mix_seed(seed, 2));
  s.time = 0.0;
  return s;
}

namespace {

void require_admissible(int n, double p, double q) {
  const AdmissibilityReport rep = check_admissible(n, p, q, 1.0, Regime::Local);
  if (!rep.admissible)
    throw DomainError("constant estimation needs an admissible (p, q) pair at gamma = 1");
}

void require_causal_box(const GridSpec& grid, const Metric& metric, double support,
                        double horizon) {
  if (grid.boundary != Boundary::DomainOfDependence) return;
  const double needed = support + std::sqrt(metric.C0) * horizon;
  if (grid.extent < needed)
    throw ConfigError("grid extent is too small to keep the boundary out of causal range");
}

// Quadrature state shared by both estimators: collects |u(t)|_q per level and
// the running sup of the energy-pair norm.
struct LevelTrace {
  std::vector<double> lq;
  double sup_pair = 0.0;
};

double trapezoid_lp(const std::vector<double>& values, double dt, double p) {
  if (values.size() < 2) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double w = (i == 0 || i + 1 == values.size()) ? 0.5 : 1.0;
    sum += w * std::pow(values[i], p) * dt;
  }
  return std::pow(sum, 1.0 / p);
}

}  // namespace

double estimate_strichartz_constant(const Metric& metric, const GridSpec& grid, double p,
                                    double q, int trials, double horizon, std::uint64_t seed,
                                    int threads) {
  grid.check();
  if (trials < 1) throw ConfigError("estimate_strichartz_constant: trials must be >= 1");
  if (!(horizon > 0.0)) throw ConfigError("estimate_strichartz_constant: horizon must be > 0");
  require_admissible(grid.n, p, q);

  PacketBand band;
  band.center_radius = metric.rho + 1.0;
  require_causal_box(grid, metric, band.support_radius(), horizon);

  std::vector<double> quotients(trials, 0.0);
  parallel_for(static_cast<std::size_t>(trials), threads, [&](std::size_t trial) {
    const StatePair data = random_packet_data(grid, band, mix_seed(seed, trial));
    const double denom = energy_pair_norm(grid, data);
    if (denom < 1e-12) return;  // zero data drawn: excluded from the quotient

    LevelTrace trace;
    PropagateOptions opts;
    opts.observer = [&](int, double, const Field& u, const Field& v) {
      trace.lq.push_back(lq_norm(grid, u, q));
      trace.sup_pair = std::max(trace.sup_pair, energy_pair_norm(grid, {u, v, 0.0}));
    };
    const PropagateResult res = propagate_run(metric, grid, data, 0.0, horizon, opts);
    quotients[trial] = (trapezoid_lp(trace.lq, res.dt_used, p) + trace.sup_pair) / denom;
  });
  return *std::max_element(quotients.begin(), quotients.end());
}

double estimate_inhomogeneous_constant(const Metric& metric, const GridSpec& grid, double p,
                                       double q, int trials, double t1, std::uint64_t seed,
                                       int threads) {
  grid.check();
  if (trials < 1) throw ConfigError("estimate_inhomogeneous_constant: trials must be >= 1");
  if (!(t1 > 0.0)) throw ConfigError("estimate_inhomogeneous_constant: t1 must be > 0");
  require_admissible(grid.n, p, q);

  PacketBand band;
  band.center_radius = metric.rho + 1.0;
  require_causal_box(grid, metric, band.support_radius(), t1);

  GridSpec run_grid = grid;
  if (run_grid.dt <= 0.0) {
    const int steps = std::max(1, static_cast<int>(std::ceil(t1 / cfl_dt(grid, metric) - 1e-12)));
    run_grid.dt = t1 / steps;
  }

  constexpr int terms = 3;  // separable space-time packets per source draw
  std::vector<double> quotients(trials, 0.0);
  parallel_for(static_cast<std::size_t>(trials), threads, [&](std::size_t trial) {
    const std::uint64_t trial_seed = mix_seed(seed, trial);
    std::mt19937_64 rng = rng_for(trial_seed, 7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<Field> shapes(terms);
    std::vector<double> t_center(terms), t_sigma(terms);
    for (int j = 0; j < terms; ++j) {
      shapes[j] = random_packet_field(grid, band, mix_seed(trial_seed, 10 + j));
      t_center[j] = (0.2 + 0.6 * unit(rng)) * t1;
      t_sigma[j] = (1.0 / 12.0 + unit(rng) / 6.0) * t1;
    }
    auto source_at = [&](double t) -> Field {
      Field h = Field::Zero(grid.node_count());
      for (int j = 0; j < terms; ++j)
        h += packet_envelope(t - t_center[j], t_sigma[j]) * shapes[j];
      return h;
    };

    std::vector<double> source_l2;
    LevelTrace trace;
    PropagateOptions opts;
    opts.forcing = [&](int level, double t, const Field&) -> Field {
      Field h = source_at(t);
      if (static_cast<std::size_t>(level) >= source_l2.size()) source_l2.resize(level + 1, 0.0);
      source_l2[level] = l2_norm(grid, h);
      return h;
    };
    opts.observer = [&](int, double, const Field& u, const Field&) {
      trace.lq.push_back(lq_norm(grid, u, q));
    };

    StatePair zero{Field::Zero(grid.node_count()), Field::Zero(grid.node_count()), 0.0};
    const PropagateResult res = propagate_run(metric, run_grid, zero, 0.0, t1, opts);

    double h_l1l2 = 0.0;
    for (std::size_t i = 0; i < source_l2.size(); ++i) {
      const double w = (i == 0 || i + 1 == source_l2.size()) ? 0.5 : 1.0;
      h_l1l2 += w * source_l2[i] * res.dt_used;
    }
    if (h_l1l2 < 1e-12) return;
    quotients[trial] = trapezoid_lp(trace.lq, res.dt_used, p) / h_l1l2;
  });
  return *std::max_element(quotients.begin(), quotients.end());
}

}  // namespace wavelab
