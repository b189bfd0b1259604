#pragma once

#include "vbeam/common.hpp"
#include "vbeam/geometry.hpp"

namespace vbeam {

/// One beamformed scan line on the f_s grid, gated to [0, support).
struct Beam {
  SteeringAngle angle;
  std::vector<double> samples;
  double support = 0.0;  // seconds
};

enum class Interpolation {
  kLinear,  // default: adjacent-sample linear reads
  kSinc,    // Kaiser-windowed sinc reads, for band-limited fidelity
};

namespace interp_detail {

inline double bessel_i0(double x) {
  // Power series; converges quickly for the argument range used here.
  double sum = 1.0, term = 1.0;
  const double q = x * x / 4.0;
  for (int k = 1; k < 64; ++k) {
    term *= q / (k * k);
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

inline double read_linear(const std::vector<double>& rec, double x) {
  if (x < 0.0) return 0.0;
  const double fl = std::floor(x);
  const auto i = static_cast<long>(fl);
  if (i >= static_cast<long>(rec.size()) - 1) return 0.0;
  const double frac = x - fl;
  return rec[i] * (1.0 - frac) + rec[i + 1] * frac;
}

inline double read_sinc(const std::vector<double>& rec, double x) {
  constexpr int kHalf = 8;
  constexpr double kBeta = 6.0;
  const auto n = static_cast<long>(rec.size());
  if (x < 0.0 || x >= static_cast<double>(n)) return 0.0;
  const auto base = static_cast<long>(std::floor(x));
  static const double inv_i0 = 1.0 / bessel_i0(kBeta);
  double acc = 0.0;
  for (long j = base - kHalf + 1; j <= base + kHalf; ++j) {
    if (j < 0 || j >= n) continue;
    const double frac = x - static_cast<double>(j);
    const double u = frac / kHalf;
    const double win = bessel_i0(kBeta * std::sqrt(std::max(0.0, 1.0 - u * u))) * inv_i0;
    const double s = frac == 0.0 ? 1.0 : std::sin(kPi * frac) / (kPi * frac);
    acc += rec[j] * s * win;
  }
  return acc;
}

}  // namespace interp_detail

/// Dynamic delay-and-sum: averages element reads at the per-element dynamic
/// delay tau(t) over the active set, zeroing the beam at and beyond the
/// support bound. Reads past the record end contribute zero (echoes beyond
/// the penetration depth are neglected). Records are in active-set order.
inline Beam beamform_time(const std::vector<std::vector<double>>& records,
                          const ArrayGeometry& g, const SteeringAngle& angle, double fs,
                          Interpolation interp = Interpolation::kLinear) {
  g.validate();
  if (records.size() != g.active.size())
    throw ConfigError("record count does not match the active set");
  const std::size_t n = records.front().size();
  for (const auto& r : records)
    if (r.size() != n) throw ConfigError("records must share one length");

  const double T = static_cast<double>(n) / fs;
  const DirectionCosines d = direction_cosines(angle);

  Beam beam;
  beam.angle = angle;
  beam.samples.assign(n, 0.0);
  beam.support = beam_support(g, angle, T);

  const double inv_nrx = 1.0 / static_cast<double>(g.active.size());
  const auto read = interp == Interpolation::kLinear ? interp_detail::read_linear
                                                     : interp_detail::read_sinc;
  for (std::size_t e = 0; e < g.active.size(); ++e) {
    const int idx = g.active[e];
    const int m = idx / g.cols, nn = idx % g.cols;
    const double gn = g.gamma_norm(m, nn);
    const double gp = g.gamma_projection(m, nn, d);
    const std::vector<double>& rec = records[e];
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / fs;
      if (t >= beam.support) break;
      const double radicand = t * t + 4.0 * gn * gn - 4.0 * t * gp;
      const double tau = 0.5 * (t + std::sqrt(radicand));
      beam.samples[i] += read(rec, tau * fs) * inv_nrx;
    }
  }
  return beam;
}

}  // namespace vbeam
