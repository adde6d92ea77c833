#pragma once

#include <cstdint>

#include "wavelab/grid.hpp"
#include "wavelab/metric.hpp"

namespace wavelab {

/// Knobs for the random wave-packet generator used by the constant estimators.
/// Packets are Gaussian envelopes (smoothly truncated at 4 sigma, so the data
/// is compactly supported) carrying an oscillation from a fixed frequency
/// band, centered inside |x| <= center_radius.
struct PacketBand {
  int count = 8;
  double center_radius = 2.0;  // callers usually pass rho + 1
  double freq_lo = 1.0;
  double freq_hi = 4.0;
  double sigma_lo = 0.3;
  double sigma_hi = 0.8;

  double support_radius() const { return center_radius + 4.0 * sigma_hi; }
};

/// One random scalar field: a superposition of band.count packets.
Field random_packet_field(const GridSpec& grid, const PacketBand& band, std::uint64_t seed);

/// A random Cauchy pair (independent draws for u and v) at time 0.
StatePair random_packet_data(const GridSpec& grid, const PacketBand& band, std::uint64_t seed);

/// Empirical lower bound for the homogeneous space-time estimate: the largest
/// quotient [ |u|_{L^p L^q} + sup_t |(u,u_t)|_{H^1 x L^2} ] / |(g1,g2)|_{H^1 x L^2}
/// over `trials` random data draws, propagated over [0, horizon].
/// (p, q) must be admissible at gamma = 1 for the grid's dimension.
double estimate_strichartz_constant(const Metric& metric, const GridSpec& grid, double p,
                                    double q, int trials, double horizon,
                                    std::uint64_t seed = 20260819u, int threads = 0);

/// Empirical lower bound for the inhomogeneous estimate: the largest quotient
/// |integral_0^t V(t,s) h(s) ds|_{L^p L^q} / |h|_{L^1 L^2} over random smooth
/// space-time sources supported in [0, t1].
double estimate_inhomogeneous_constant(const Metric& metric, const GridSpec& grid, double p,
                                       double q, int trials, double t1,
                                       std::uint64_t seed = 20260819u, int threads = 0);

}  // namespace wavelab
