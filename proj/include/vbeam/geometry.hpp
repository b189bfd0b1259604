#pragma once

#include <algorithm>
#include <set>

#include "vbeam/common.hpp"

namespace vbeam {

struct SteeringAngle {
  double theta_x = 0.0;  // radians
  double theta_y = 0.0;  // radians
};

struct DirectionCosines {
  double x = 0.0, y = 0.0, z = 1.0;
};

/// Propagation direction for a steering angle pair. The triple is exactly
/// unit-norm by construction; the denominator is positive for |theta| < pi/2.
inline DirectionCosines direction_cosines(const SteeringAngle& a) {
  if (std::abs(a.theta_x) >= kPi / 2 || std::abs(a.theta_y) >= kPi / 2)
    throw ConfigError("steering angle magnitude must be below 90 degrees");
  const double sx = std::sin(a.theta_x), cx = std::cos(a.theta_x);
  const double sy = std::sin(a.theta_y), cy = std::cos(a.theta_y);
  const double den = std::sqrt(1.0 - sx * sx * sy * sy);
  return {sx * cy / den, cx * sy / den, cx * cy / den};
}

/// 2D transducer grid with an optional per-element z offset (small curvature)
/// and a binary active subset. The reference element is virtual at the grid's
/// geometric center, so element offsets are symmetric and the reference offset
/// is exactly zero. Offsets are expressed in seconds (divided by the speed of
/// sound) since every downstream formula consumes them that way.
struct ArrayGeometry {
  int rows = 32;
  int cols = 32;
  double pitch_x = 140e-6;  // meters
  double pitch_y = 140e-6;  // meters
  double speed_of_sound = 1540.0;
  std::vector<double> z_offsets;  // meters, per element, empty means planar
  std::vector<int> active;        // flattened indices m * cols + n

  int element_count() const { return rows * cols; }

  double delta_x(int m) const { return (m - 0.5 * (rows - 1)) * pitch_x; }
  double delta_y(int n) const { return (n - 0.5 * (cols - 1)) * pitch_y; }
  double delta_z(int m, int n) const {
    if (z_offsets.empty()) return 0.0;
    return z_offsets[static_cast<std::size_t>(m) * cols + n];
  }

  double gamma_x(int m) const { return delta_x(m) / speed_of_sound; }
  double gamma_y(int n) const { return delta_y(n) / speed_of_sound; }
  double gamma_z(int m, int n) const { return delta_z(m, n) / speed_of_sound; }

  double gamma_norm(int m, int n) const {
    const double gx = gamma_x(m), gy = gamma_y(n), gz = gamma_z(m, n);
    return std::sqrt(gx * gx + gy * gy + gz * gz);
  }

  /// Projection of the element offset onto the steering direction, seconds.
  double gamma_projection(int m, int n, const DirectionCosines& d) const {
    return gamma_x(m) * d.x + gamma_y(n) * d.y + gamma_z(m, n) * d.z;
  }

  void validate() const {
    if (rows < 1 || cols < 1) throw ConfigError("grid must be at least 1x1");
    if (pitch_x <= 0.0 || pitch_y <= 0.0) throw ConfigError("pitch must be positive");
    if (speed_of_sound <= 0.0) throw ConfigError("speed of sound must be positive");
    if (!z_offsets.empty() && z_offsets.size() != static_cast<std::size_t>(element_count()))
      throw ConfigError("z offset table size must match the grid");
    if (active.empty()) throw ConfigError("active set must not be empty");
    for (int idx : active)
      if (idx < 0 || idx >= element_count())
        throw ConfigError("active element index outside the grid");
  }
};

inline std::vector<int> full_active_set(int rows, int cols) {
  std::vector<int> out(static_cast<std::size_t>(rows) * cols);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<int>(i);
  return out;
}

/// Union of the two main diagonals of a square grid: 2M elements for even M,
/// 2M-1 for odd (center shared).
inline std::vector<int> diagonal_subset(int rows, int cols) {
  if (rows != cols) throw ConfigError("diagonal active set requires a square grid");
  std::set<int> s;
  for (int i = 0; i < rows; ++i) {
    s.insert(i * cols + i);
    s.insert(i * cols + (cols - 1 - i));
  }
  return std::vector<int>(s.begin(), s.end());
}

/// Dynamic delay tau(t): the time at which an element must be read so that
/// its aligned sample corresponds to beam time t. Non-decreasing in t, equal
/// to |gamma| at t = 0, and the identity for the (virtual) reference element.
inline double delay_tau(const ArrayGeometry& g, int m, int n, const DirectionCosines& d,
                        double t) {
  const double gn = g.gamma_norm(m, n);
  const double gp = g.gamma_projection(m, n, d);
  const double radicand = t * t + 4.0 * gn * gn - 4.0 * t * gp;
  if (radicand < 0.0) throw NumericError("delay radicand negative: non-physical geometry");
  return 0.5 * (t + std::sqrt(radicand));
}

/// Slope d tau / dt, used for quadrature panel sizing and as the echo
/// amplitude ratio of the first-order alignment analysis.
inline double delay_tau_slope(const ArrayGeometry& g, int m, int n, const DirectionCosines& d,
                              double t) {
  const double gn = g.gamma_norm(m, n);
  const double gp = g.gamma_projection(m, n, d);
  const double root = std::sqrt(t * t + 4.0 * gn * gn - 4.0 * t * gp);
  return 0.5 * (1.0 + (t - 2.0 * gp) / root);
}

/// Inverse of delay_tau: delay_tau(g, m, n, d, delay_tau_inverse(..., t)) == t
/// for t >= |gamma|. The denominator vanishes only when the element lies
/// exactly along the steering ray at distance |gamma|.
inline double delay_tau_inverse(const ArrayGeometry& g, int m, int n, const DirectionCosines& d,
                                double t) {
  const double gn = g.gamma_norm(m, n);
  const double gp = g.gamma_projection(m, n, d);
  const double den = t - gp;
  if (std::abs(den) < 1e-15) throw NumericError("degenerate geometry: element on steering ray");
  return (t * t - gn * gn) / den;
}

/// Support bound T_B: beam samples at t >= T_B would need element reads past
/// the penetration time T, so the beam is gated there. Minimum of the
/// per-element inverse delays over the active set.
inline double beam_support(const ArrayGeometry& g, const SteeringAngle& angle, double T) {
  if (T <= 0.0) throw ConfigError("penetration time must be positive");
  if (g.active.empty()) throw ConfigError("beam_support: empty active set");
  const DirectionCosines d = direction_cosines(angle);
  double tb = std::numeric_limits<double>::infinity();
  for (int idx : g.active) {
    const int m = idx / g.cols, n = idx % g.cols;
    tb = std::min(tb, delay_tau_inverse(g, m, n, d, T));
  }
  return tb;
}

}  // namespace vbeam
