#include "wavelab/norms.hpp"

#include <cmath>
#include <complex>

#include <unsupported/Eigen/FFT>

namespace wavelab {

namespace {

// Walks every 1-d line of a full grid along `axis` (axis 0 is the slowest index)
// and hands (line base, stride) to the visitor.
template <typename Visit>
void for_each_line(const GridSpec& grid, int axis, Visit&& visit) {
  const std::size_t count = grid.node_count();
  const int m = grid.points_per_axis;
  std::size_t stride = count / m;
  for (int d = 0; d < axis; ++d) stride /= m;
  const std::size_t block = stride * m;
  for (std::size_t base = 0; base < count; base += block)
    for (std::size_t inner = 0; inner < stride; ++inner) visit(base + inner, stride);
}

double radial_face_weight(const GridSpec& grid, int face) {
  const double r = (face + 1) * grid.h();
  return unit_sphere_area(grid.n) * std::pow(r, grid.n - 1) * grid.h();
}

}  // namespace

double h1dot_norm(const GridSpec& grid, const Field& u) {
  grid.check();
  const int m = grid.points_per_axis;
  const double h = grid.h();
  double sum = 0.0;

  if (grid.kind == GridKind::Radial) {
    for (int i = 0; i < m; ++i) {
      const double up = (i + 1 < m) ? u[i + 1] : 0.0;
      const double du = (up - u[i]) / h;
      sum += radial_face_weight(grid, i) * du * du;
    }
    return std::sqrt(sum);
  }

  const bool per = grid.boundary == Boundary::Periodic;
  const double w = std::pow(h, grid.n);
  for (int axis = 0; axis < grid.n; ++axis) {
    for_each_line(grid, axis, [&](std::size_t line, std::size_t stride) {
      const std::size_t last = line + (m - 1) * stride;
      for (int k = 0; k < m; ++k) {
        const std::size_t idx = line + k * stride;
        const double up = (k + 1 < m) ? u[idx + stride] : (per ? u[line] : 0.0);
        const double um = (k > 0) ? u[idx - stride] : (per ? u[last] : 0.0);
        const double du = (up - um) / (2.0 * h);
        sum += w * du * du;
      }
    });
  }
  return std::sqrt(sum);
}

double l2_norm(const GridSpec& grid, const Field& f) {
  return std::sqrt((volume_weights(grid) * f.square()).sum());
}

double lq_norm(const GridSpec& grid, const Field& f, double q) {
  if (!(q >= 1.0)) throw DomainError("lq_norm: q must be >= 1");
  if (std::isinf(q)) return f.size() ? f.abs().maxCoeff() : 0.0;
  const double sum = (volume_weights(grid) * f.abs().pow(q)).sum();
  return std::pow(sum, 1.0 / q);
}

double energy_value(const Metric& metric, const GridSpec& grid, const StatePair& state) {
  grid.check();
  const int m = grid.points_per_axis;
  const double h = grid.h();
  const Field a = coefficient_field(metric, grid, state.time);
  const Field& u = state.u;

  double kinetic = (volume_weights(grid) * state.v.square()).sum();
  double elastic = 0.0;

  if (grid.kind == GridKind::Radial) {
    for (int i = 0; i < m; ++i) {
      const double up = (i + 1 < m) ? u[i + 1] : 0.0;
      const double af = (i + 1 < m) ? 0.5 * (a[i] + a[i + 1]) : 0.5 * (a[m - 1] + 1.0);
      const double du = (up - u[i]) / h;
      elastic += radial_face_weight(grid, i) * af * du * du;
    }
    return 0.5 * (kinetic + elastic);
  }

  const bool per = grid.boundary == Boundary::Periodic;
  const double w = std::pow(h, grid.n);
  for (int axis = 0; axis < grid.n; ++axis) {
    for_each_line(grid, axis, [&](std::size_t line, std::size_t stride) {
      const std::size_t last = line + (m - 1) * stride;
      for (int k = 0; k + 1 < m; ++k) {
        const std::size_t idx = line + k * stride;
        const double du = (u[idx + stride] - u[idx]) / h;
        elastic += w * 0.5 * (a[idx] + a[idx + stride]) * du * du;
      }
      if (per) {
        const double du = (u[line] - u[last]) / h;
        elastic += w * 0.5 * (a[last] + a[line]) * du * du;
      } else {
        const double du0 = u[line] / h;  // ghost u = 0, ghost a = 1 outside the box
        elastic += w * 0.5 * (a[line] + 1.0) * du0 * du0;
        const double du1 = u[last] / h;
        elastic += w * 0.5 * (a[last] + 1.0) * du1 * du1;
      }
    });
  }
  return 0.5 * (kinetic + elastic);
}

double hgamma_norm(const GridSpec& grid, const Field& u, double gamma) {
  grid.check();
  if (grid.kind != GridKind::Full || grid.boundary != Boundary::Periodic)
    throw ConfigError("hgamma_norm: spectral seminorm is defined on Periodic full grids only");
  if (!std::isfinite(gamma) || gamma < 0.0)
    throw DomainError("hgamma_norm: gamma must be finite and >= 0");
  const std::size_t count = grid.node_count();
  if (static_cast<std::size_t>(u.size()) != count)
    throw DomainError("hgamma_norm: field does not match the grid");

  const int m = grid.points_per_axis;
  std::vector<std::complex<double>> work(count);
  for (std::size_t i = 0; i < count; ++i) work[i] = u[i];

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> line_in(m), line_out(m);
  for (int axis = 0; axis < grid.n; ++axis) {
    for_each_line(grid, axis, [&](std::size_t line, std::size_t stride) {
      for (int k = 0; k < m; ++k) line_in[k] = work[line + k * stride];
      fft.fwd(line_out, line_in);
      for (int k = 0; k < m; ++k) work[line + k * stride] = line_out[k];
    });
  }

  // Squared frequency per axis index: xi = pi * k' / L with k' the signed mode.
  std::vector<double> xi2(m);
  for (int k = 0; k < m; ++k) {
    const int signed_k = (2 * k <= m) ? k : k - m;
    const double xi = pi * signed_k / grid.extent;
    xi2[k] = xi * xi;
  }

  double sum = 0.0;
  for (std::size_t flat = 0; flat < count; ++flat) {
    std::size_t rest = flat;
    double xi_sq = 0.0;
    for (int axis = grid.n - 1; axis >= 0; --axis) {
      xi_sq += xi2[rest % m];
      rest /= m;
    }
    if (xi_sq == 0.0) continue;  // zero mode dropped
    sum += std::pow(xi_sq, gamma) * std::norm(work[flat]);
  }
  const double cell = std::pow(grid.h(), grid.n);
  return std::sqrt(cell / static_cast<double>(count) * sum);
}

double energy_pair_norm(const GridSpec& grid, const StatePair& state) {
  return std::hypot(h1dot_norm(grid, state.u), l2_norm(grid, state.v));
}

NormReport norms(const Metric& metric, const GridSpec& grid, const StatePair& state,
                 const std::vector<double>& q_list, std::optional<double> gamma) {
  NormReport report;
  report.h1dot = h1dot_norm(grid, state.u);
  report.l2 = l2_norm(grid, state.v);
  report.energy = energy_value(metric, grid, state);
  for (double q : q_list) report.lq[q] = lq_norm(grid, state.u, q);
  if (gamma) {
    report.gamma = gamma;
    report.hgamma = hgamma_norm(grid, state.u, *gamma);
  }
  return report;
}

double spacetime_norm(const GridSpec& grid, const std::vector<Field>& u_series, double dt,
                      double p, double q) {
  if (!(dt > 0.0)) throw ConfigError("spacetime_norm: dt must be positive");
  if (!(p >= 1.0)) throw DomainError("spacetime_norm: p must be >= 1");
  if (u_series.size() < 2) return 0.0;

  if (std::isinf(p)) {
    double best = 0.0;
    for (const Field& f : u_series) best = std::max(best, lq_norm(grid, f, q));
    return best;
  }
  double sum = 0.0;
  const std::size_t last = u_series.size() - 1;
  for (std::size_t i = 0; i <= last; ++i) {
    const double weight = (i == 0 || i == last) ? 0.5 : 1.0;
    sum += weight * std::pow(lq_norm(grid, u_series[i], q), p) * dt;
  }
  return std::pow(sum, 1.0 / p);
}

}  // namespace wavelab
