#pragma once

#include <fstream>

#include "vbeam/common.hpp"
#include "vbeam/frames.hpp"
#include "vbeam/geometry.hpp"

namespace vbeam {

/// Pointwise distortion kernel q_k(t) for one element and steering angle: an
/// indicator on [|gamma|, tau(T_B)), a rational amplitude factor, and an
/// oscillatory phase. Its Fourier coefficients Q[l] couple element spectra to
/// beam spectra. support_tb is the beam support bound T_B for the angle.
inline cplx distortion_function(const ArrayGeometry& g, int m, int n,
                                const SteeringAngle& angle, int k, double t, double T,
                                double support_tb) {
  const DirectionCosines d = direction_cosines(angle);
  const double gn = g.gamma_norm(m, n);
  const double gp = g.gamma_projection(m, n, d);
  const double upper = delay_tau(g, m, n, d, support_tb);
  if (t < gn || t >= upper) return {0.0, 0.0};
  const double den = t - gp;
  if (den * den < 1e-30) return {0.0, 0.0};
  const double amp = (t * t + gn * gn - 2.0 * t * gp) / (den * den);
  const double phase = -(2.0 * kPi / T) * k * (t * gp - gn * gn) / den;
  return std::polar(amp, phase);
}

/// Gauss-Legendre nodes/weights on [-1, 1] via Newton iteration on the
/// Legendre recurrence.
inline void gauss_legendre(int order, std::vector<double>& x, std::vector<double>& w) {
  x.resize(order);
  w.resize(order);
  for (int i = 0; i < (order + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (order + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < order; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = order * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[order - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[order - 1 - i] = w[i];
  }
}

struct LutBuildParams {
  int l_neg = 10;            // window lower extent L1 (stored l in [-L1, L2])
  int l_pos = 10;            // window upper extent L2
  double panel_turns = 1.2;  // max phase turns per quadrature panel
  int gl_order = 12;
  bool verify_tail = false;  // also integrate a few l beyond the window
  int verify_extra = 5;
};

/// Fourier-coefficient tables Q_k[l] of the distortion kernels, for every
/// (angle, active element, beam coefficient k) and window l in [-L1, L2].
struct DistortionLut {
  int rows = 0, cols = 0;
  int l_neg = 10, l_pos = 10;
  int k_first = 0, k_count = 0;
  double T = 0.0;
  std::uint64_t config_hash = 0;
  double tail_ratio = -1.0;  // max out-of-window/peak magnitude seen, -1 if unverified
  std::vector<SteeringAngle> angles;
  std::vector<int> active;
  std::vector<double> supports;  // T_B per angle
  std::vector<cplx> values;      // [angle][element][k][l] contiguous

  int window() const { return l_neg + l_pos + 1; }

  std::size_t offset(std::size_t angle_i, std::size_t elem_i, int k) const {
    const std::size_t per_k = static_cast<std::size_t>(window());
    const std::size_t per_elem = per_k * k_count;
    const std::size_t per_angle = per_elem * active.size();
    return angle_i * per_angle + elem_i * per_elem +
           static_cast<std::size_t>(k - k_first) * per_k;
  }

  /// Pointer to the (2L+1) window entries for one (angle, element, k),
  /// ordered l = -L1 .. L2.
  const cplx* at(std::size_t angle_i, std::size_t elem_i, int k) const {
    if (k < k_first || k >= k_first + k_count)
      throw NumericError("beam coefficient index outside the built band");
    return values.data() + offset(angle_i, elem_i, k);
  }
};

inline std::uint64_t lut_config_hash(const ArrayGeometry& g, double T,
                                     const std::vector<SteeringAngle>& angles, int k_first,
                                     int k_count, const LutBuildParams& p) {
  Fnv1a h;
  h.feed_u32(static_cast<std::uint32_t>(g.rows));
  h.feed_u32(static_cast<std::uint32_t>(g.cols));
  h.feed_f64(g.pitch_x);
  h.feed_f64(g.pitch_y);
  h.feed_f64(g.speed_of_sound);
  for (double z : g.z_offsets) h.feed_f64(z);
  for (int a : g.active) h.feed_u32(static_cast<std::uint32_t>(a));
  h.feed_f64(T);
  for (const SteeringAngle& a : angles) {
    h.feed_f64(a.theta_x);
    h.feed_f64(a.theta_y);
  }
  h.feed_u32(static_cast<std::uint32_t>(k_first));
  h.feed_u32(static_cast<std::uint32_t>(k_count));
  h.feed_u32(static_cast<std::uint32_t>(p.l_neg));
  h.feed_u32(static_cast<std::uint32_t>(p.l_pos));
  h.feed_f64(p.panel_turns);
  h.feed_u32(static_cast<std::uint32_t>(p.gl_order));
  return h.state;
}

namespace lut_detail {

/// Integrates Q_k[l] for one (element, angle) over the window (plus optional
/// verification margin) on shared quadrature nodes.
///
/// After substituting u = tau^{-1}(t) the integrand becomes the unit-modulus
/// exponential exp(-i (2 pi / T)(k u + (l - k) tau(u))) on [0, T_B]: smooth,
/// no indicator edges, no rational amplitude. Panel density follows the local
/// phase-turn bound so Gauss-Legendre converges to near machine precision.
struct ElementTask {
  double gn = 0.0;       // |gamma|
  double gp = 0.0;       // projection onto the steering direction
  double tb = 0.0;       // T_B
  double T = 0.0;
  int k_first = 0, k_count = 0;
  int l_neg = 10, l_pos = 10;
};

inline void integrate_element(const ElementTask& task, const LutBuildParams& p, cplx* out,
                              int out_window, double* tail_ratio) {
  const double T = task.T;
  const int k_last = task.k_first + task.k_count - 1;
  const double kmax = static_cast<double>(std::max(std::abs(task.k_first), std::abs(k_last)));
  const int lv_neg = task.l_neg + (p.verify_tail ? p.verify_extra : 0);
  const int lv_pos = task.l_pos + (p.verify_tail ? p.verify_extra : 0);
  const double lmax = static_cast<double>(std::max(lv_neg, lv_pos));

  // Panel edges from the cumulative phase-turn estimate.
  constexpr int kProbe = 257;
  std::vector<double> cum(kProbe, 0.0);
  double prev_density = 0.0;
  for (int i = 0; i < kProbe; ++i) {
    const double u = task.tb * i / (kProbe - 1);
    const double root = std::sqrt(u * u + 4.0 * task.gn * task.gn - 4.0 * u * task.gp);
    const double slope = 0.5 * (1.0 + (u - 2.0 * task.gp) / root);
    const double density = (kmax * std::abs(1.0 - slope) + lmax + 1.0) / T;
    if (i > 0)
      cum[i] = cum[i - 1] + 0.5 * (density + prev_density) * (task.tb / (kProbe - 1));
    prev_density = density;
  }
  const int panels = std::max(8, static_cast<int>(std::ceil(cum.back() / p.panel_turns)) + 4);
  std::vector<double> edges(panels + 1);
  edges[0] = 0.0;
  edges[panels] = task.tb;
  int probe = 0;
  for (int j = 1; j < panels; ++j) {
    const double target = cum.back() * j / panels;
    while (probe < kProbe - 2 && cum[probe + 1] < target) ++probe;
    const double span = cum[probe + 1] - cum[probe];
    const double frac = span > 0.0 ? (target - cum[probe]) / span : 0.0;
    edges[j] = task.tb * (probe + frac) / (kProbe - 1);
  }

  std::vector<double> glx, glw;
  gauss_legendre(p.gl_order, glx, glw);
  const int n_nodes = panels * p.gl_order;
  std::vector<double> wn(n_nodes);
  std::vector<cplx> ek(n_nodes), step_a(n_nodes);
  std::vector<cplx> bl(static_cast<std::size_t>(n_nodes) * (lv_neg + lv_pos + 1));
  const int lv_window = lv_neg + lv_pos + 1;
  for (int j = 0; j < panels; ++j) {
    const double mid = 0.5 * (edges[j] + edges[j + 1]);
    const double half = 0.5 * (edges[j + 1] - edges[j]);
    for (int q = 0; q < p.gl_order; ++q) {
      const int node = j * p.gl_order + q;
      const double u = mid + half * glx[q];
      wn[node] = half * glw[q];
      const double root = std::sqrt(u * u + 4.0 * task.gn * task.gn - 4.0 * u * task.gp);
      const double tau = 0.5 * (u + root);
      const double phase_a = -2.0 * kPi * (u - tau) / T;
      const double phase_b = -2.0 * kPi * tau / T;
      step_a[node] = std::polar(1.0, phase_a);
      ek[node] = std::polar(wn[node], phase_a * task.k_first);
      for (int l = -lv_neg; l <= lv_pos; ++l)
        bl[static_cast<std::size_t>(node) * lv_window + (l + lv_neg)] =
            std::polar(1.0, phase_b * l);
    }
  }

  const double inv_T = 1.0 / T;
  std::vector<cplx> acc(lv_window);
  for (int k = task.k_first; k <= k_last; ++k) {
    std::fill(acc.begin(), acc.end(), cplx(0.0, 0.0));
    for (int node = 0; node < n_nodes; ++node) {
      const cplx v = ek[node];
      const cplx* row = bl.data() + static_cast<std::size_t>(node) * lv_window;
      for (int l = 0; l < lv_window; ++l) acc[l] += v * row[l];
      ek[node] = v * step_a[node];
    }
    cplx* dst = out + static_cast<std::size_t>(k - task.k_first) * out_window;
    double peak = 0.0;
    for (int l = -task.l_neg; l <= task.l_pos; ++l) {
      const cplx q = acc[l + lv_neg] * inv_T;
      dst[l + task.l_neg] = q;
      peak = std::max(peak, std::abs(q));
    }
    if (p.verify_tail && tail_ratio != nullptr && peak > 0.0) {
      double tail = 0.0;
      for (int l = -lv_neg; l <= lv_pos; ++l) {
        if (l >= -task.l_neg && l <= task.l_pos) continue;
        tail = std::max(tail, std::abs(acc[l + lv_neg]) * inv_T);
      }
      *tail_ratio = std::max(*tail_ratio, tail / peak);
    }
  }
}

}  // namespace lut_detail

/// Builds the distortion-coefficient tables for every (angle, active element,
/// k in [k_first, k_first + k_count)). Deterministic: identical inputs give
/// byte-identical tables.
inline DistortionLut build_lut(const ArrayGeometry& g, double T,
                               const std::vector<SteeringAngle>& angles, int k_first,
                               int k_count, const LutBuildParams& params = {}) {
  g.validate();
  if (k_count < 1) throw ConfigError("LUT band must contain at least one coefficient");
  if (params.l_neg < 0 || params.l_pos < 0) throw ConfigError("LUT window extents must be >= 0");
  if (params.gl_order < 2) throw ConfigError("quadrature order must be at least 2");
  if (!(params.panel_turns > 0.0)) throw ConfigError("panel turn budget must be positive");

  DistortionLut lut;
  lut.rows = g.rows;
  lut.cols = g.cols;
  lut.l_neg = params.l_neg;
  lut.l_pos = params.l_pos;
  lut.k_first = k_first;
  lut.k_count = k_count;
  lut.T = T;
  lut.angles = angles;
  lut.active = g.active;
  lut.config_hash = lut_config_hash(g, T, angles, k_first, k_count, params);
  lut.supports.reserve(angles.size());
  lut.values.resize(static_cast<std::size_t>(angles.size()) * g.active.size() * k_count *
                    lut.window());
  lut.tail_ratio = params.verify_tail ? 0.0 : -1.0;

  for (std::size_t ai = 0; ai < angles.size(); ++ai) {
    const DirectionCosines d = direction_cosines(angles[ai]);
    const double tb = beam_support(g, angles[ai], T);
    lut.supports.push_back(tb);
    for (std::size_t ei = 0; ei < g.active.size(); ++ei) {
      const int idx = g.active[ei];
      const int m = idx / g.cols, n = idx % g.cols;
      lut_detail::ElementTask task;
      task.gn = g.gamma_norm(m, n);
      task.gp = g.gamma_projection(m, n, d);
      task.tb = tb;
      task.T = T;
      task.k_first = k_first;
      task.k_count = k_count;
      task.l_neg = params.l_neg;
      task.l_pos = params.l_pos;
      lut_detail::integrate_element(task, params, lut.values.data() + lut.offset(ai, ei, k_first),
                                    lut.window(),
                                    params.verify_tail ? &lut.tail_ratio : nullptr);
    }
  }
  return lut;
}

inline void write_lut(const std::string& path, const DistortionLut& lut) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open LUT file for writing: " + path);
  using namespace io_detail;
  write_magic(os, "VBQ1");
  write_pod<std::uint32_t>(os, 1u);
  write_pod<std::uint64_t>(os, lut.config_hash);
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(lut.rows));
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(lut.cols));
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(lut.active.size()));
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(lut.angles.size()));
  write_pod<std::int32_t>(os, lut.k_first);
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(lut.k_count));
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(lut.l_neg));
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(lut.l_pos));
  write_pod<double>(os, lut.T);
  write_pod<double>(os, lut.tail_ratio);
  for (const SteeringAngle& a : lut.angles) {
    write_pod<double>(os, a.theta_x);
    write_pod<double>(os, a.theta_y);
  }
  for (int idx : lut.active) write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(idx));
  for (double tb : lut.supports) write_pod<double>(os, tb);
  os.write(reinterpret_cast<const char*>(lut.values.data()),
           static_cast<std::streamsize>(lut.values.size() * sizeof(cplx)));
  if (!os) throw ConfigError("LUT write failed: " + path);
}

inline DistortionLut read_lut(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open LUT file: " + path);
  using namespace io_detail;
  check_magic(is, "VBQ1", "distortion LUT");
  const auto version = read_pod<std::uint32_t>(is);
  if (version != 1u) throw ConfigError("unsupported LUT version");
  DistortionLut lut;
  lut.config_hash = read_pod<std::uint64_t>(is);
  lut.rows = static_cast<int>(read_pod<std::uint32_t>(is));
  lut.cols = static_cast<int>(read_pod<std::uint32_t>(is));
  const auto n_active = read_pod<std::uint32_t>(is);
  const auto n_angles = read_pod<std::uint32_t>(is);
  lut.k_first = read_pod<std::int32_t>(is);
  lut.k_count = static_cast<int>(read_pod<std::uint32_t>(is));
  lut.l_neg = static_cast<int>(read_pod<std::uint32_t>(is));
  lut.l_pos = static_cast<int>(read_pod<std::uint32_t>(is));
  lut.T = read_pod<double>(is);
  lut.tail_ratio = read_pod<double>(is);
  lut.angles.resize(n_angles);
  for (SteeringAngle& a : lut.angles) {
    a.theta_x = read_pod<double>(is);
    a.theta_y = read_pod<double>(is);
  }
  lut.active.resize(n_active);
  for (int& idx : lut.active) idx = static_cast<int>(read_pod<std::uint32_t>(is));
  lut.supports.resize(n_angles);
  for (double& tb : lut.supports) tb = read_pod<double>(is);
  lut.values.resize(static_cast<std::size_t>(n_angles) * n_active * lut.k_count * lut.window());
  is.read(reinterpret_cast<char*>(lut.values.data()),
          static_cast<std::streamsize>(lut.values.size() * sizeof(cplx)));
  if (!is) throw ConfigError("LUT payload truncated: " + path);
  return lut;
}

}  // namespace vbeam
