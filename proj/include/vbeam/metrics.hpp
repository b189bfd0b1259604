#pragma once

#include "vbeam/volume.hpp"

namespace vbeam {

/// Full width at the given level (default: half power, 1/sqrt(2) of the
/// peak magnitude) with linear-interpolated crossings. Positions must be
/// strictly increasing; the width is returned in position units.
inline double curve_fwhm(const std::vector<double>& positions, const std::vector<double>& curve,
                         double level_frac = 1.0 / 1.41421356237309515) {
  if (positions.size() != curve.size() || curve.size() < 3)
    throw ConfigError("width estimation needs matching position/value arrays");
  std::size_t p = 0;
  for (std::size_t i = 1; i < curve.size(); ++i)
    if (curve[i] > curve[p]) p = i;
  const double peak = curve[p];
  if (!(peak > 0.0)) throw NumericError("no main lobe above the noise floor");
  const double level = peak * level_frac;

  double left = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = p; i-- > 0;) {
    if (curve[i] < level) {
      const double f = (level - curve[i]) / (curve[i + 1] - curve[i]);
      left = positions[i] + f * (positions[i + 1] - positions[i]);
      break;
    }
  }
  double right = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = p + 1; i < curve.size(); ++i) {
    if (curve[i] < level) {
      const double f = (curve[i - 1] - level) / (curve[i - 1] - curve[i]);
      right = positions[i - 1] + f * (positions[i] - positions[i - 1]);
      break;
    }
  }
  if (std::isnan(left) || std::isnan(right))
    throw NumericError("half-maximum crossing not found inside the curve window");
  return right - left;
}

struct PsfReport {
  enum class Axis { kLateral, kAxial };
  Axis axis = Axis::kLateral;
  std::vector<double> positions;  // degrees (lateral) or mm depth (axial)
  std::vector<double> curve;      // lateral: max = 1; axial: unit energy
  double fwhm = 0.0;
  double avg_side_lobe_db = -std::numeric_limits<double>::infinity();
  double first_side_lobe_db = -std::numeric_limits<double>::infinity();
};

namespace metrics_detail {

/// Side-lobe region: everything outside the main lobe's first local minima
/// that fall below -20 dB of the peak, one per side. Returns false if no
/// qualifying minimum exists on either side (curve is all main lobe).
inline bool side_lobe_region(const std::vector<double>& curve, std::size_t peak_idx,
                             std::size_t& left_end, std::size_t& right_begin) {
  const double peak = curve[peak_idx];
  const double bar = peak * std::pow(10.0, -20.0 / 20.0);
  bool found_left = false, found_right = false;
  for (std::size_t i = peak_idx; i-- > 1;) {
    if (curve[i] < bar && curve[i] <= curve[i - 1] && curve[i] <= curve[i + 1]) {
      left_end = i;  // side lobes occupy [0, left_end)
      found_left = true;
      break;
    }
  }
  for (std::size_t i = peak_idx + 1; i + 1 < curve.size(); ++i) {
    if (curve[i] < bar && curve[i] <= curve[i - 1] && curve[i] <= curve[i + 1]) {
      right_begin = i + 1;  // side lobes occupy [right_begin, size)
      found_right = true;
      break;
    }
  }
  if (!found_left) left_end = 0;
  if (!found_right) right_begin = curve.size();
  return found_left || found_right;
}

inline void fill_side_lobes(PsfReport& rep) {
  std::size_t p = 0;
  for (std::size_t i = 1; i < rep.curve.size(); ++i)
    if (rep.curve[i] > rep.curve[p]) p = i;
  const double peak = rep.curve[p];
  std::size_t left_end = 0, right_begin = rep.curve.size();
  if (!side_lobe_region(rep.curve, p, left_end, right_begin)) return;
  double power = 0.0, best = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < rep.curve.size(); ++i) {
    if (i >= left_end && i < right_begin) continue;
    power += rep.curve[i] * rep.curve[i];
    best = std::max(best, rep.curve[i]);
    ++count;
  }
  if (count == 0) return;
  rep.avg_side_lobe_db = power_db(power / count / (peak * peak));
  rep.first_side_lobe_db = best > 0.0 ? amplitude_db(best / peak) : rep.first_side_lobe_db;
}

}  // namespace metrics_detail

/// Lateral point-spread function: the constant-radius arc through the focus
/// reflector, swept over theta_x on the theta_y = 0 plane. The arc radius is
/// the envelope peak of the central beam (the pulse center, not the leading
/// edge of the echo). Curve is normalized so its maximum is 1.
inline PsfReport lateral_psf(const Volume& vol, double focus_r = -1.0) {
  (void)focus_r;  // the reflector is the only scatterer; its peak is global
  if (vol.nx() < 3) throw ConfigError("lateral PSF needs at least 3 beams across theta_x");
  const std::size_t iy = nearest_index(vol.theta_y, 0.0);
  const std::size_t ix0 = nearest_index(vol.theta_x, 0.0);
  const std::vector<double> env0 = analytic_envelope(vol.beam(ix0, iy));
  std::size_t peak_sample = 0;
  for (std::size_t i = 1; i < env0.size(); ++i)
    if (env0[i] > env0[peak_sample]) peak_sample = i;
  if (!(env0[peak_sample] > 0.0)) throw NumericError("no main lobe above the noise floor");

  PsfReport rep;
  rep.axis = PsfReport::Axis::kLateral;
  rep.positions.resize(vol.nx());
  rep.curve.resize(vol.nx());
  for (std::size_t ix = 0; ix < vol.nx(); ++ix) {
    rep.positions[ix] = rad2deg(vol.theta_x[ix]);
    rep.curve[ix] = analytic_envelope(vol.beam(ix, iy))[peak_sample];
  }
  const double peak = *std::max_element(rep.curve.begin(), rep.curve.end());
  if (!(peak > 0.0)) throw NumericError("no main lobe above the noise floor");
  for (double& v : rep.curve) v /= peak;
  rep.fwhm = curve_fwhm(rep.positions, rep.curve);
  metrics_detail::fill_side_lobes(rep);
  return rep;
}

/// Axial point-spread function along depth for one scan line, optionally
/// restricted to a window of samples around one reflector. Curve is
/// normalized to unit energy; positions are depth in millimeters.
inline PsfReport axial_psf(const Volume& vol, std::size_t ix, std::size_t iy,
                           int center_sample = -1, int half_window = -1) {
  const std::vector<double> env = analytic_envelope(vol.beam(ix, iy));
  int c = center_sample;
  if (c < 0) {
    c = 0;
    for (int i = 1; i < vol.samples; ++i)
      if (env[static_cast<std::size_t>(i)] > env[static_cast<std::size_t>(c)]) c = i;
  }
  int lo = 0, hi = vol.samples;
  if (half_window >= 0) {
    lo = std::max(0, c - half_window);
    hi = std::min(vol.samples, c + half_window + 1);
  }
  if (hi - lo < 3) throw ConfigError("axial PSF window too narrow");

  PsfReport rep;
  rep.axis = PsfReport::Axis::kAxial;
  rep.positions.resize(static_cast<std::size_t>(hi - lo));
  rep.curve.resize(static_cast<std::size_t>(hi - lo));
  double energy = 0.0;
  for (int i = lo; i < hi; ++i) {
    rep.positions[static_cast<std::size_t>(i - lo)] = vol.depth_of_sample(i) * 1e3;
    const double v = env[static_cast<std::size_t>(i)];
    rep.curve[static_cast<std::size_t>(i - lo)] = v;
    energy += v * v;
  }
  if (!(energy > 0.0)) throw NumericError("no main lobe above the noise floor");
  const double scale = 1.0 / std::sqrt(energy);
  for (double& v : rep.curve) v *= scale;
  rep.fwhm = curve_fwhm(rep.positions, rep.curve);
  metrics_detail::fill_side_lobes(rep);
  return rep;
}

/// Beam SNR: signal energy over a 5-wavelength segment centered on the clean
/// beam's envelope peak, against the full-line energy of (noisy - clean).
/// Zero noise energy reports +infinity.
inline double beam_snr(const std::vector<double>& clean, const std::vector<double>& noisy,
                       double wavelength, double fs, double speed_of_sound) {
  if (clean.size() != noisy.size() || clean.empty())
    throw ConfigError("SNR needs two aligned beams of equal length");
  const std::vector<double> env = analytic_envelope(clean);
  std::size_t peak = 0;
  for (std::size_t i = 1; i < env.size(); ++i)
    if (env[i] > env[peak]) peak = i;
  if (!(env[peak] > 0.0)) throw NumericError("clean beam has no detectable peak");

  const long half = std::lround(5.0 * wavelength * fs / (2.0 * speed_of_sound));
  const std::size_t lo = peak > static_cast<std::size_t>(half) ? peak - half : 0;
  const std::size_t hi = std::min(clean.size(), peak + static_cast<std::size_t>(half) + 1);
  double es = 0.0;
  for (std::size_t i = lo; i < hi; ++i) es += clean[i] * clean[i];
  double en = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const double d = noisy[i] - clean[i];
    en += d * d;
  }
  if (en == 0.0) return std::numeric_limits<double>::infinity();
  return power_db(es / en);
}

}  // namespace vbeam
