#pragma once

#include <fstream>

#include "vbeam/fft.hpp"
#include "vbeam/frames.hpp"

namespace vbeam {

/// A reconstructed volume: one beam of N samples per (theta_x, theta_y) pair
/// of the scan raster, plus the metadata needed to map samples to depth.
struct Volume {
  std::vector<double> theta_x;  // radians, raster axis 1
  std::vector<double> theta_y;  // radians, raster axis 2
  int samples = 0;
  double fs = 0.0;
  double T = 0.0;
  double speed_of_sound = 0.0;
  std::vector<float> voxels;  // [ix][iy][n], ix major

  std::size_t nx() const { return theta_x.size(); }
  std::size_t ny() const { return theta_y.size(); }

  std::size_t index(std::size_t ix, std::size_t iy, std::size_t n) const {
    return (ix * ny() + iy) * static_cast<std::size_t>(samples) + n;
  }

  void allocate() { voxels.assign(nx() * ny() * static_cast<std::size_t>(samples), 0.0f); }

  void set_beam(std::size_t ix, std::size_t iy, const std::vector<double>& beam) {
    if (beam.size() != static_cast<std::size_t>(samples))
      throw ConfigError("beam length does not match the volume grid");
    for (std::size_t n = 0; n < beam.size(); ++n)
      voxels[index(ix, iy, n)] = static_cast<float>(beam[n]);
  }

  std::vector<double> beam(std::size_t ix, std::size_t iy) const {
    std::vector<double> out(static_cast<std::size_t>(samples));
    for (std::size_t n = 0; n < out.size(); ++n) out[n] = voxels[index(ix, iy, n)];
    return out;
  }

  /// Depth (one-way, meters) of sample n: r = c t / 2.
  double depth_of_sample(double n) const { return speed_of_sound * (n / fs) / 2.0; }
  double sample_of_depth(double r) const { return (2.0 * r / speed_of_sound) * fs; }
};

inline void write_volume(const std::string& path, const Volume& v) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open volume file for writing: " + path);
  using namespace io_detail;
  write_magic(os, "VBV1");
  write_pod<std::uint32_t>(os, 1u);
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(v.theta_x.size()));
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(v.theta_y.size()));
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(v.samples));
  write_pod<double>(os, v.fs);
  write_pod<double>(os, v.T);
  write_pod<double>(os, v.speed_of_sound);
  for (double t : v.theta_x) write_pod<double>(os, t);
  for (double t : v.theta_y) write_pod<double>(os, t);
  os.write(reinterpret_cast<const char*>(v.voxels.data()),
           static_cast<std::streamsize>(v.voxels.size() * sizeof(float)));
  if (!os) throw ConfigError("volume write failed: " + path);
}

inline Volume read_volume(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open volume file: " + path);
  using namespace io_detail;
  check_magic(is, "VBV1", "volume container");
  const auto version = read_pod<std::uint32_t>(is);
  if (version != 1u) throw ConfigError("unsupported volume container version");
  Volume v;
  const auto nx = read_pod<std::uint32_t>(is);
  const auto ny = read_pod<std::uint32_t>(is);
  v.samples = static_cast<int>(read_pod<std::uint32_t>(is));
  v.fs = read_pod<double>(is);
  v.T = read_pod<double>(is);
  v.speed_of_sound = read_pod<double>(is);
  v.theta_x.resize(nx);
  for (double& t : v.theta_x) t = read_pod<double>(is);
  v.theta_y.resize(ny);
  for (double& t : v.theta_y) t = read_pod<double>(is);
  v.voxels.resize(static_cast<std::size_t>(nx) * ny * v.samples);
  is.read(reinterpret_cast<char*>(v.voxels.data()),
          static_cast<std::streamsize>(v.voxels.size() * sizeof(float)));
  if (!is) throw ConfigError("volume payload truncated: " + path);
  return v;
}

/// Grayscale image with values in [0, 1].
struct Image {
  int width = 0, height = 0;
  std::vector<double> pixels;  // row major

  double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

/// Log compression of an envelope value to display units in [0, 1]:
/// 0 dB (the volume maximum) maps to 1, -range_db and below to 0.
inline double log_compress(double value, double peak, double range_db) {
  if (!(peak > 0.0) || value <= 0.0) return 0.0;
  const double db = amplitude_db(value / peak);
  return std::clamp(1.0 + db / range_db, 0.0, 1.0);
}

inline std::size_t nearest_index(const std::vector<double>& grid, double value) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double d = std::abs(grid[i] - value);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

namespace volume_detail {

inline double bilinear(const std::vector<std::vector<double>>& rows,
                       const std::vector<double>& axis0, double a0, double a1_samples) {
  // rows[i] is an envelope indexed by fractional sample a1_samples; axis0 is
  // the (sorted) angular grid sampled at a0. Clamped bilinear interpolation.
  if (rows.empty()) return 0.0;
  const int n0 = static_cast<int>(axis0.size());
  int i0 = 0;
  while (i0 < n0 - 2 && axis0[static_cast<std::size_t>(i0) + 1] < a0) ++i0;
  double f0 = 0.0;
  if (n0 > 1) {
    const double lo = axis0[static_cast<std::size_t>(i0)], hi = axis0[static_cast<std::size_t>(i0) + 1];
    f0 = std::clamp((a0 - lo) / (hi - lo), 0.0, 1.0);
  }
  const int n1 = static_cast<int>(rows[0].size());
  if (a1_samples < 0.0 || a1_samples > n1 - 1) return 0.0;
  const int i1 = std::min(static_cast<int>(a1_samples), n1 - 2);
  const double f1 = std::clamp(a1_samples - i1, 0.0, 1.0);
  const auto& r0 = rows[static_cast<std::size_t>(i0)];
  const auto& r1 = rows[static_cast<std::size_t>(std::min(i0 + 1, n0 - 1))];
  const double v0 = r0[static_cast<std::size_t>(i1)] * (1.0 - f1) + r0[static_cast<std::size_t>(i1) + 1] * f1;
  const double v1 = r1[static_cast<std::size_t>(i1)] * (1.0 - f1) + r1[static_cast<std::size_t>(i1) + 1] * f1;
  return v0 * (1.0 - f0) + v1 * f0;
}

}  // namespace volume_detail

/// Scan-converted cross-section through the volume: the plane theta_y = 0
/// (axis = 0) or theta_x = 0 (axis = 1), envelope-detected, log-compressed,
/// and bilinearly interpolated onto a Cartesian (lateral, depth) display
/// grid. `peak_out` (optional) receives the envelope peak used as 0 dB.
inline Image cross_section(const Volume& vol, int axis, int width = 400, int height = 600,
                           double range_db = 40.0, double* peak_out = nullptr) {
  if (axis != 0 && axis != 1) throw ConfigError("cross-section axis must be 0 or 1");
  if (vol.nx() == 0 || vol.ny() == 0 || vol.samples == 0)
    throw ConfigError("cross-section of an empty volume");
  const std::vector<double>& swept = axis == 0 ? vol.theta_x : vol.theta_y;
  const std::vector<double>& fixed = axis == 0 ? vol.theta_y : vol.theta_x;
  const std::size_t fixed_i = nearest_index(fixed, 0.0);

  std::vector<std::vector<double>> env(swept.size());
  double peak = 0.0;
  for (std::size_t i = 0; i < swept.size(); ++i) {
    const std::vector<double> beam =
        axis == 0 ? vol.beam(i, fixed_i) : vol.beam(fixed_i, i);
    env[i] = analytic_envelope(beam);
    for (double v : env[i]) peak = std::max(peak, v);
  }
  if (peak_out) *peak_out = peak;

  const double r_max = vol.depth_of_sample(vol.samples - 1);
  const double half_span = r_max * std::sin(std::max(std::abs(swept.front()), std::abs(swept.back())));
  Image img;
  img.width = width;
  img.height = height;
  img.pixels.assign(static_cast<std::size_t>(width) * height, 0.0);
  for (int y = 0; y < height; ++y) {
    const double z = r_max * (y + 0.5) / height;  // depth
    for (int x = 0; x < width; ++x) {
      const double lx = half_span * (2.0 * (x + 0.5) / width - 1.0);
      const double r = std::hypot(lx, z);
      const double th = std::atan2(lx, z);
      if (th < swept.front() || th > swept.back()) continue;
      const double s = vol.sample_of_depth(r);
      const double v = volume_detail::bilinear(env, swept, th, s);
      img.at(x, y) = log_compress(v, peak, range_db);
    }
  }
  return img;
}

/// 16-bit binary PGM (P5, big-endian samples) for lossless grayscale export.
inline void write_pgm16(const std::string& path, const Image& img) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open image file for writing: " + path);
  os << "P5\n" << img.width << " " << img.height << "\n65535\n";
  for (double p : img.pixels) {
    const double clamped = std::clamp(p, 0.0, 1.0);
    const auto v = static_cast<std::uint16_t>(std::lround(clamped * 65535.0));
    const unsigned char bytes[2] = {static_cast<unsigned char>(v >> 8),
                                    static_cast<unsigned char>(v & 0xff)};
    os.write(reinterpret_cast<const char*>(bytes), 2);
  }
  if (!os) throw ConfigError("image write failed: " + path);
}

}  // namespace vbeam
