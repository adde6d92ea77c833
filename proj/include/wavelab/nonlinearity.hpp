#pragma once

#include "wavelab/common.hpp"

#include <cmath>

namespace wavelab {

/// Power-type nonlinearities f(u) acting pointwise on the displacement.
///
/// Two forms are provided:
///   PurePower:      f(u) = sign * scale * |u|^{k-1} u
///   SmoothedPower:  f(u) = sign * scale * u (u^2 + mu^2)^{(k-1)/2}
/// with Focusing mapped to sign = +1 (the exact self-similar blow-up
/// u(t) = sqrt(2)/(T - t) solves u'' = u^3 with this convention) and
/// Defocusing to sign = -1. `scale` defaults to 1; setting it to 0 yields
/// the zero map (Lipschitz constant 0), which turns the fixed-point
/// iteration into a single linear solve.
struct Nonlinearity {
  enum class Sign { Focusing, Defocusing };
  enum class Form { PurePower, SmoothedPower };

  double k = 3.0;
  Sign sign = Sign::Focusing;
  Form form = Form::PurePower;
  double mu = 0.0;     // smoothing floor, SmoothedPower only
  double scale = 1.0;  // overall strength; 0 disables the nonlinearity

  void validate() const {
    if (!(k >= 1.0) || !std::isfinite(k))
      throw DomainError("Nonlinearity: power k must be finite and >= 1");
    if (!(mu >= 0.0) || !std::isfinite(mu))
      throw DomainError("Nonlinearity: smoothing floor mu must be finite and >= 0");
    if (!(scale >= 0.0) || !std::isfinite(scale))
      throw DomainError("Nonlinearity: scale must be finite and >= 0");
  }

  double signum() const { return sign == Sign::Focusing ? 1.0 : -1.0; }

  double value(double u) const {
    if (scale == 0.0) return 0.0;
    const double s = signum() * scale;
    if (form == Form::PurePower) return s * std::pow(std::abs(u), k - 1.0) * u;
    return s * u * std::pow(u * u + mu * mu, 0.5 * (k - 1.0));
  }

  Field apply(const Field& u) const {
    if (scale == 0.0) return Field::Zero(u.size());
    const double s = signum() * scale;
    if (form == Form::PurePower) return s * u.abs().pow(k - 1.0) * u;
    return s * u * (u.square() + mu * mu).pow(0.5 * (k - 1.0));
  }

  /// Growth/Lipschitz constant C with |f(u)| <= C |u|^k and
  /// |f(u) - f(v)| <= C |u - v| (|u| + |v|)^{k-1}. Exact for PurePower
  /// (C = k scale). For SmoothedPower the bound is range-restricted: it
  /// holds on the working range |u| >= mu, where the smoothing floor is
  /// dominated and (u^2 + mu^2)^{(k-1)/2} <= 2^{(k-1)/2} |u|^{k-1}.
  double lipschitz_constant() const {
    if (scale == 0.0) return 0.0;
    if (form == Form::PurePower) return scale * k;
    return scale * k * std::pow(2.0, 0.5 * (k - 1.0));
  }
};

inline const char* to_string(Nonlinearity::Sign s) {
  return s == Nonlinearity::Sign::Focusing ? "focusing" : "defocusing";
}

inline const char* to_string(Nonlinearity::Form f) {
  return f == Nonlinearity::Form::PurePower ? "pure_power" : "smoothed_power";
}

}  // namespace wavelab
