#include "wavelab/metric.hpp"

#include <cmath>

#include "doctest.h"

using namespace wavelab;

namespace {

Vec vec3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

}  // namespace

TEST_CASE("bump profile has exact support and unit peak") {
  CHECK(bump_chi(0.0) == 1.0);
  CHECK(bump_chi(1.0) == 0.0);
  CHECK(bump_chi(-1.0) == 0.0);
  CHECK(bump_chi(1.5) == 0.0);
  CHECK(bump_chi(0.5) > 0.0);
  CHECK(bump_chi(0.5) < 1.0);
  CHECK(bump_chi_prime(0.0) == 0.0);
  CHECK(bump_chi_prime(1.2) == 0.0);

  // Centered differences reproduce the analytic derivative.
  for (double s : {0.2, 0.5, 0.8}) {
    const double fd = (bump_chi(s + 1e-6) - bump_chi(s - 1e-6)) / 2e-6;
    CHECK(bump_chi_prime(s) == doctest::Approx(fd).epsilon(1e-8));
    CHECK(bump_chi_prime(s) < 0.0);
  }
}

TEST_CASE("smooth plateau step") {
  CHECK(smooth_plateau(-0.5) == 0.0);
  CHECK(smooth_plateau(0.0) == 0.0);
  CHECK(smooth_plateau(1.0) == 1.0);
  CHECK(smooth_plateau(2.0) == 1.0);
  CHECK(smooth_plateau(0.5) == doctest::Approx(0.5));
  double prev = 0.0;
  for (double s = 0.05; s < 1.0; s += 0.05) {
    const double f = smooth_plateau(s);
    CHECK(f >= prev);
    prev = f;
  }
}

TEST_CASE("periodic bump bounds and support") {
  const Metric m = make_periodic_bump(0.5, 2.0, 1.0, 0.5);
  CHECK(m.c0 == 1.0);
  CHECK(m.C0 == doctest::Approx(1.75).epsilon(1e-15));
  CHECK(m.time_dependent());

  // Outside the support radius the coefficient is exactly 1 with zero rates.
  const Vec far = vec3(3.0, 0.0, 0.0);  // |x| = 1.5 rho
  CHECK(m.value(0.37, far) == 1.0);
  CHECK(m.dt_value(0.37, far) == 0.0);
  CHECK(m.grad_value(0.37, far).norm() == 0.0);

  // Peak value at the center when the modulation crests.
  CHECK(m.value(0.25, Vec::Zero(3)) == doctest::Approx(1.75).epsilon(1e-15));

  // Zero amplitude degenerates to the unit coefficient.
  const Metric flat = make_periodic_bump(0.0, 2.0, 1.0, 0.5);
  CHECK(flat.value(0.4, vec3(0.1, 0.0, -0.2)) == 1.0);
  CHECK(flat.c0 == 1.0);
  CHECK(flat.C0 == 1.0);
  CHECK_FALSE(flat.time_dependent());

  // Negative amplitude dips below 1; bounds follow the closed form.
  const Metric dip = make_periodic_bump(-0.5, 2.0, 1.0, 0.5);
  CHECK(dip.c0 == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(dip.C0 == 1.0);

  CHECK_THROWS_AS(make_periodic_bump(-1.0, 2.0, 1.0, 0.0), DomainError);
  CHECK_THROWS_AS(make_periodic_bump(0.5, 2.0, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(make_periodic_bump(0.5, -2.0, 1.0, 0.5), DomainError);
  CHECK_THROWS_AS(make_periodic_bump(0.5, 2.0, 0.0, 0.5), DomainError);
  // amplitude > -1 but the modulation still drives inf a below 0
  CHECK_THROWS_AS(make_periodic_bump(-0.9, 2.0, 1.0, 0.5), DomainError);
}

TEST_CASE("static bump bounds, support, and derivatives") {
  const Metric m = make_static_bump(0.75, 1.0);
  CHECK(m.c0 == 1.0);
  CHECK(m.C0 == 1.75);
  CHECK_FALSE(m.time_dependent());
  CHECK(m.value(5.0, vec3(1.0, 0.0, 0.0)) == 1.0);  // |x| = rho exactly
  CHECK(m.value(5.0, Vec::Zero(3)) == doctest::Approx(1.75).epsilon(1e-15));
  CHECK(m.dt_value(1.0, vec3(0.2, 0.1, 0.0)) == 0.0);
  CHECK(m.grad_value(0.0, Vec::Zero(3)).norm() == 0.0);

  const Metric dip = make_static_bump(-0.5, 1.0);
  CHECK(dip.c0 == 0.5);
  CHECK(dip.C0 == 1.0);
  CHECK_THROWS_AS(make_static_bump(-1.0, 1.0), DomainError);
}

TEST_CASE("analytic gradients match finite differences at second order") {
  const Metric m = make_static_bump(0.6, 2.0);
  const Vec x = vec3(0.7, -0.4, 0.3);
  const Vec grad = m.grad_value(0.0, x);

  auto fd_error = [&](double h) {
    Vec fd(3);
    Vec xp = x;
    for (int d = 0; d < 3; ++d) {
      xp[d] = x[d] + h;
      const double hi = m.value(0.0, xp);
      xp[d] = x[d] - h;
      const double lo = m.value(0.0, xp);
      xp[d] = x[d];
      fd[d] = (hi - lo) / (2.0 * h);
    }
    return (fd - grad).norm();
  };

  const double e1 = fd_error(1e-3);
  const double e2 = fd_error(5e-4);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.15));

  // Same ratio test in time for the periodic family.
  const Metric pm = make_periodic_bump(0.5, 2.0, 0.7, 0.5);
  const double dt_exact = pm.dt_value(0.3, x);
  auto fd_dt_error = [&](double h) {
    return std::abs((pm.value(0.3 + h, x) - pm.value(0.3 - h, x)) / (2.0 * h) - dt_exact);
  };
  CHECK(fd_dt_error(1e-3) / fd_dt_error(5e-4) == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("periodicity defect stays at rounding level") {
  const Metric m = make_periodic_bump(0.5, 1.0, 0.93, 0.7);
  for (double t : {0.0, 0.11, 0.4, 0.77}) {
    for (double r : {0.0, 0.3, 0.8}) {
      const Vec x = vec3(r, 0.0, 0.0);
      CHECK(std::abs(m.value(t + m.period, x) - m.value(t, x)) <= 1e-14);
    }
  }
}

TEST_CASE("custom metrics evaluate callables with optional derivative fallback") {
  const double rho = 1.5;
  auto value = [rho](double, const Vec& x) { return 1.0 + 0.3 * bump_chi(x.norm() / rho); };

  // Fully specified: no fallback, matches the equivalent built-in.
  auto dt = [](double, const Vec&) { return 0.0; };
  auto grad = [rho](double, const Vec& x) -> Vec {
    const double r = x.norm();
    if (r < 1e-12 || r >= rho) return Vec::Zero(x.size());
    return Vec(0.3 * bump_chi_prime(r / rho) / (rho * r) * x);
  };
  const Metric full = make_custom_metric(value, rho, 0.0, 1.0, 1.3, dt, grad);
  CHECK_FALSE(full.fd_fallback);
  CHECK_FALSE(full.time_dependent());

  const Metric reference = make_static_bump(0.3, rho);
  const Vec x = vec3(0.4, 0.2, -0.5);
  CHECK(full.value(0.0, x) == doctest::Approx(reference.value(0.0, x)).epsilon(1e-15));
  CHECK((full.grad_value(0.0, x) - reference.grad_value(0.0, x)).norm() <= 1e-15);

  // Value-only: finite-difference fallback flagged and accurate.
  const Metric fd = make_custom_metric(value, rho, 0.0, 1.0, 1.3);
  CHECK(fd.fd_fallback);
  CHECK((fd.grad_value(0.0, x) - reference.grad_value(0.0, x)).norm() <= 1e-8);
  CHECK(fd.dt_value(0.0, x) == doctest::Approx(0.0));

  CHECK_THROWS_AS(make_custom_metric(nullptr, 1.0, 0.0, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(make_custom_metric(value, 1.0, 0.0, -1.0, 1.0), DomainError);
}

TEST_CASE("sampled validation against declared bounds") {
  GridSpec grid{GridKind::Radial, 3, 4.0, 200, 0.0, Boundary::DomainOfDependence};

  // Unit coefficient: flat, no defects.
  {
    const auto report = validate(make_unit_metric(2.0), grid, 5);
    CHECK(report.min_value == 1.0);
    CHECK(report.max_value == 1.0);
    CHECK(report.max_support_violation == 0.0);
    CHECK(report.max_periodicity_defect == 0.0);
    CHECK(report.ok());
  }

  // Periodic family: extremes inside the closed-form bounds, exact support,
  // rounding-level periodicity defect.
  {
    const auto report = validate(make_periodic_bump(0.5, 2.0, 1.0, 0.5), grid, 9);
    CHECK(report.min_value >= 1.0 - 1e-12);
    CHECK(report.max_value <= 1.75 + 1e-12);
    CHECK(report.max_support_violation == 0.0);
    CHECK(report.max_periodicity_defect <= 1e-14);
    CHECK_FALSE(report.c0_violation);
    CHECK_FALSE(report.C0_violation);
    CHECK(report.ok());
  }

  // A custom coefficient that dips negative is flagged, not thrown.
  {
    auto bad = [](double, const Vec& x) { return 1.0 - 2.0 * bump_chi(x.norm() / 2.0); };
    const auto report = validate(make_custom_metric(bad, 2.0, 0.0, 0.5, 1.0), grid, 3);
    CHECK(report.positivity_violation);
    CHECK(report.c0_violation);
    CHECK_FALSE(report.ok());
  }

  // Grid must cover the support ball.
  GridSpec small{GridKind::Radial, 3, 1.0, 50, 0.0, Boundary::DomainOfDependence};
  CHECK_THROWS_AS(validate(make_static_bump(0.5, 2.0), small, 1), DomainError);
}

TEST_CASE("full-grid validation samples every node") {
  GridSpec grid{GridKind::Full, 2, 3.0, 61, 0.0, Boundary::DomainOfDependence};
  const auto report = validate(make_static_bump(-0.5, 2.0), grid, 1);
  CHECK(report.min_value >= 0.5 - 1e-12);
  CHECK(report.min_value < 0.51);  // the grid has a node near the center
  CHECK(report.max_value == 1.0);
  CHECK(report.max_support_violation == 0.0);
  CHECK(report.ok());
}
