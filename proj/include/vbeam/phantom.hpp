#pragma once

#include <array>
#include <utility>

#include "vbeam/common.hpp"
#include "vbeam/fft.hpp"
#include "vbeam/geometry.hpp"
#include "vbeam/pulse.hpp"

namespace vbeam {

/// Point reflector, located on the ray of its own steering direction at the
/// depth corresponding to the round-trip reference arrival time t_l.
struct Reflector {
  double t_l = 0.0;       // seconds, round trip at the reference element
  double theta_x = 0.0;   // radians
  double theta_y = 0.0;   // radians
  double amplitude = 1.0;
};

struct Phantom {
  std::vector<Reflector> reflectors;
};

/// Cartesian position of a reflector, meters.
inline std::array<double, 3> reflector_position(double speed_of_sound, const Reflector& r) {
  const DirectionCosines d = direction_cosines({r.theta_x, r.theta_y});
  const double range = speed_of_sound * r.t_l / 2.0;
  return {range * d.x, range * d.y, range * d.z};
}

/// Round-trip arrival time of a reflector's echo at one element: transmit
/// path from the (virtual) reference at the origin plus the return path to
/// the element. Equals delay_tau evaluated at t_l with the reflector's own
/// steering direction, which the tests assert against this geometric form.
inline double arrival_time(const ArrayGeometry& g, int m, int n, const Reflector& r) {
  const std::array<double, 3> p = reflector_position(g.speed_of_sound, r);
  const double ex = g.delta_x(m), ey = g.delta_y(n), ez = g.delta_z(m, n);
  const double out = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
  const double bx = p[0] - ex, by = p[1] - ey, bz = p[2] - ez;
  const double back = std::sqrt(bx * bx + by * by + bz * bz);
  return (out + back) / g.speed_of_sound;
}

/// First-order echo amplitude ratio after alignment; approaches 1 when the
/// element offsets are small against the arrival time.
inline double sigma_ratio(const ArrayGeometry& g, int m, int n, const SteeringAngle& angle,
                          const Reflector& r) {
  return delay_tau_slope(g, m, n, direction_cosines(angle), r.t_l);
}

inline void validate_phantom(const Phantom& ph, const ArrayGeometry& g, const Pulse& pulse,
                             double T) {
  if (pulse.duration > T / 25.0)
    throw ConfigError("pulse duration too long for the penetration time (needs T/25)");
  for (const Reflector& r : ph.reflectors) {
    if (!(r.t_l >= 0.0)) throw ConfigError("reflector arrival time must be non-negative");
    if (!std::isfinite(r.amplitude)) throw ConfigError("reflector amplitude must be finite");
    if (r.t_l + 2.0 * pulse.duration > T)
      throw ConfigError("reflector too deep: echo would extend past the penetration time");
    for (int idx : g.active) {
      const int m = idx / g.cols, n = idx % g.cols;
      const double budget = 2.0 * (std::abs(g.gamma_x(m)) + std::abs(g.gamma_y(n)) +
                                   std::abs(g.gamma_z(m, n)));
      if (r.t_l < budget)
        throw ConfigError("reflector too shallow for the aperture extent");
    }
  }
}

/// Adds white Gaussian noise to records in active-set order. Each
/// (angle_index, element) pair gets its own substream, so the result does not
/// depend on processing order and re-noising a shared clean synthesis equals
/// synthesizing with noise directly.
inline void add_record_noise(std::vector<std::vector<double>>& records, const ArrayGeometry& g,
                             double noise_std, std::uint64_t seed, std::uint64_t angle_index) {
  if (noise_std <= 0.0) return;
  if (records.size() != g.active.size())
    throw ConfigError("record count does not match the active set");
  for (std::size_t a = 0; a < records.size(); ++a) {
    GaussianStream noise(mix_seed(seed, angle_index, static_cast<std::uint64_t>(g.active[a])));
    for (double& v : records[a]) v += noise_std * noise.next();
  }
}

/// Synthesized records for the active elements, in active-set order.
struct SynthesisResult {
  std::vector<std::vector<double>> records;
  /// (active-set position, reflector index) pairs whose echo would end past T.
  std::vector<std::pair<int, int>> dropped;
};

/// Per-element echo synthesis: each reflector contributes a pulse replica at
/// its geometric arrival time, placed by periodic sinc (frequency-domain
/// phase ramp) interpolation, plus optional white Gaussian noise.
///
/// Echoes whose support would extend past T are dropped per element, so the
/// circular placement never wraps. The noise stream is drawn per
/// (angle_index, element) so frames are reproducible regardless of worker
/// scheduling.
inline SynthesisResult synthesize_element_signals(const ArrayGeometry& g, const Phantom& ph,
                                                  const Pulse& pulse, int grid_n,
                                                  double noise_std = 0.0,
                                                  std::uint64_t seed = 0,
                                                  std::uint64_t angle_index = 0) {
  g.validate();
  const double ts = pulse.sample_period();
  const double T = grid_n * ts;
  const int half = grid_n / 2;
  const std::vector<cplx> pulse_fft = [&] {
    std::vector<cplx> padded(grid_n, cplx(0.0, 0.0));
    for (std::size_t i = 0; i < pulse.samples.size(); ++i)
      padded[i] = cplx(pulse.samples[i], 0.0);
    return fft(padded);
  }();

  SynthesisResult out;
  out.records.reserve(g.active.size());
  std::vector<cplx> spec(grid_n);
  for (std::size_t a = 0; a < g.active.size(); ++a) {
    const int idx = g.active[a];
    const int m = idx / g.cols, n = idx % g.cols;
    std::fill(spec.begin(), spec.end(), cplx(0.0, 0.0));
    bool any = false;
    for (std::size_t l = 0; l < ph.reflectors.size(); ++l) {
      const Reflector& r = ph.reflectors[l];
      const double d = arrival_time(g, m, n, r);
      if (d + pulse.duration > T) {
        out.dropped.emplace_back(static_cast<int>(a), static_cast<int>(l));
        continue;
      }
      any = true;
      const double shift = d / ts;  // fractional samples
      const double w = -2.0 * kPi * shift / grid_n;
      // Half-spectrum ramp keeps the shifted signal exactly real.
      spec[0] += r.amplitude * pulse_fft[0];
      for (int k = 1; k < half; ++k)
        spec[k] += r.amplitude * pulse_fft[k] * std::polar(1.0, w * k);
      if (2 * half == grid_n)
        spec[half] += r.amplitude * pulse_fft[half].real() * std::cos(kPi * shift);
    }
    std::vector<double> rec(grid_n, 0.0);
    if (any) {
      for (int k = 1; k < half; ++k) spec[grid_n - k] = std::conj(spec[k]);
      rec = ifft_expect_real(spec, 1e-6);
    }
    out.records.push_back(std::move(rec));
  }
  add_record_noise(out.records, g, noise_std, seed, angle_index);
  return out;
}

}  // namespace vbeam
