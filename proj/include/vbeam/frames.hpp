#pragma once

#include <cstdio>
#include <cstring>
#include <fstream>

#include "vbeam/common.hpp"
#include "vbeam/geometry.hpp"

namespace vbeam {

/// Raw element records for a set of transmit events, one block of
/// float32 records per angle per active element.
struct FrameSet {
  int rows = 0;
  int cols = 0;
  int samples = 0;
  double fs = 0.0;
  double T = 0.0;
  double noise_std = 0.0;
  std::uint64_t seed = 0;
  std::vector<int> active;                 // flattened element indices
  std::vector<SteeringAngle> angles;       // transmit events
  std::vector<std::vector<float>> data;    // [angle][active * samples]

  std::size_t angle_count() const { return angles.size(); }

  std::vector<std::vector<double>> records_for_angle(std::size_t angle_idx) const {
    const std::vector<float>& block = data.at(angle_idx);
    std::vector<std::vector<double>> out(active.size(), std::vector<double>(samples));
    for (std::size_t e = 0; e < active.size(); ++e)
      for (int i = 0; i < samples; ++i)
        out[e][i] = block[e * samples + i];
    return out;
  }
};

/// Low-rate alternative payload: per-element Fourier coefficient bands
/// (complex64 on disk) instead of full-rate records. `nu` is the audited
/// retained-sample count per record; `grid_n` the full-rate grid the band
/// indices refer to.
struct BandFrameSet {
  int rows = 0;
  int cols = 0;
  int grid_n = 0;
  int k_lo = 0, k_hi = -1;  // element coefficient band, inclusive
  int nu = 0;
  double fs = 0.0;
  double T = 0.0;
  double noise_std = 0.0;
  std::uint64_t seed = 0;
  std::vector<int> active;
  std::vector<SteeringAngle> angles;
  std::vector<std::vector<cplx>> data;  // [angle][active * band_count()]

  int band_count() const { return k_hi - k_lo + 1; }
  std::size_t angle_count() const { return angles.size(); }

  std::vector<std::vector<cplx>> coeffs_for_angle(std::size_t angle_idx) const {
    const std::vector<cplx>& block = data.at(angle_idx);
    const std::size_t n = static_cast<std::size_t>(band_count());
    std::vector<std::vector<cplx>> out(active.size());
    for (std::size_t e = 0; e < active.size(); ++e)
      out[e].assign(block.begin() + e * n, block.begin() + (e + 1) * n);
    return out;
  }
};

namespace io_detail {

template <typename T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw ConfigError("unexpected end of file");
  return v;
}

inline void write_magic(std::ostream& os, const char magic[4]) { os.write(magic, 4); }

inline void check_magic(std::istream& is, const char magic[4], const std::string& what) {
  char buf[4];
  is.read(buf, 4);
  if (!is || std::memcmp(buf, magic, 4) != 0)
    throw ConfigError("not a " + what + " file (bad magic)");
}

// Frame container payload kinds.
constexpr std::uint32_t kPayloadRecords = 0;  // float32 full-rate records
constexpr std::uint32_t kPayloadBands = 1;    // complex64 coefficient bands

}  // namespace io_detail

inline void write_frames(const std::string& path, const FrameSet& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open frame file for writing: " + path);
  using namespace io_detail;
  write_magic(os, "VBF1");
  write_pod<std::uint32_t>(os, 1u);  // version
  write_pod<std::uint32_t>(os, kPayloadRecords);
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(f.rows));
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(f.cols));
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(f.active.size()));
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(f.samples));
  write_pod<double>(os, f.fs);
  write_pod<double>(os, f.T);
  write_pod<double>(os, f.noise_std);
  write_pod<std::uint64_t>(os, f.seed);
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(f.angles.size()));
  for (const SteeringAngle& a : f.angles) {
    write_pod<double>(os, a.theta_x);
    write_pod<double>(os, a.theta_y);
  }
  for (int idx : f.active) write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(idx));
  for (const std::vector<float>& block : f.data) {
    if (block.size() != f.active.size() * static_cast<std::size_t>(f.samples))
      throw ConfigError("frame block size mismatch");
    os.write(reinterpret_cast<const char*>(block.data()),
             static_cast<std::streamsize>(block.size() * sizeof(float)));
  }
  if (!os) throw ConfigError("frame file write failed: " + path);
}

inline FrameSet read_frames(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open frame file: " + path);
  using namespace io_detail;
  check_magic(is, "VBF1", "frame container");
  const auto version = read_pod<std::uint32_t>(is);
  if (version != 1u) throw ConfigError("unsupported frame container version");
  const auto payload = read_pod<std::uint32_t>(is);
  if (payload != kPayloadRecords)
    throw ConfigError("frame file holds coefficient bands, not full-rate records: " + path);
  FrameSet f;
  f.rows = static_cast<int>(read_pod<std::uint32_t>(is));
  f.cols = static_cast<int>(read_pod<std::uint32_t>(is));
  const auto n_active = read_pod<std::uint32_t>(is);
  f.samples = static_cast<int>(read_pod<std::uint32_t>(is));
  f.fs = read_pod<double>(is);
  f.T = read_pod<double>(is);
  f.noise_std = read_pod<double>(is);
  f.seed = read_pod<std::uint64_t>(is);
  const auto n_angles = read_pod<std::uint32_t>(is);
  f.angles.resize(n_angles);
  for (SteeringAngle& a : f.angles) {
    a.theta_x = read_pod<double>(is);
    a.theta_y = read_pod<double>(is);
  }
  f.active.resize(n_active);
  for (int& idx : f.active) idx = static_cast<int>(read_pod<std::uint32_t>(is));
  f.data.resize(n_angles);
  for (std::vector<float>& block : f.data) {
    block.resize(static_cast<std::size_t>(n_active) * f.samples);
    is.read(reinterpret_cast<char*>(block.data()),
            static_cast<std::streamsize>(block.size() * sizeof(float)));
    if (!is) throw ConfigError("frame payload truncated: " + path);
  }
  return f;
}

inline void write_band_frames(const std::string& path, const BandFrameSet& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open frame file for writing: " + path);
  using namespace io_detail;
  write_magic(os, "VBF1");
  write_pod<std::uint32_t>(os, 1u);
  write_pod<std::uint32_t>(os, kPayloadBands);
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(f.rows));
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(f.cols));
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(f.active.size()));
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(f.grid_n));
  write_pod<std::int32_t>(os, f.k_lo);
  write_pod<std::int32_t>(os, f.k_hi);
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(f.nu));
  write_pod<double>(os, f.fs);
  write_pod<double>(os, f.T);
  write_pod<double>(os, f.noise_std);
  write_pod<std::uint64_t>(os, f.seed);
  write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(f.angles.size()));
  for (const SteeringAngle& a : f.angles) {
    write_pod<double>(os, a.theta_x);
    write_pod<double>(os, a.theta_y);
  }
  for (int idx : f.active) write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(idx));
  const std::size_t per_block = f.active.size() * static_cast<std::size_t>(f.band_count());
  for (const std::vector<cplx>& block : f.data) {
    if (block.size() != per_block) throw ConfigError("band block size mismatch");
    for (const cplx& v : block) {
      write_pod<float>(os, static_cast<float>(v.real()));
      write_pod<float>(os, static_cast<float>(v.imag()));
    }
  }
  if (!os) throw ConfigError("frame file write failed: " + path);
}

inline BandFrameSet read_band_frames(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open frame file: " + path);
  using namespace io_detail;
  check_magic(is, "VBF1", "frame container");
  const auto version = read_pod<std::uint32_t>(is);
  if (version != 1u) throw ConfigError("unsupported frame container version");
  const auto payload = read_pod<std::uint32_t>(is);
  if (payload != kPayloadBands)
    throw ConfigError("frame file holds full-rate records, not coefficient bands: " + path);
  BandFrameSet f;
  f.rows = static_cast<int>(read_pod<std::uint32_t>(is));
  f.cols = static_cast<int>(read_pod<std::uint32_t>(is));
  const auto n_active = read_pod<std::uint32_t>(is);
  f.grid_n = static_cast<int>(read_pod<std::uint32_t>(is));
  f.k_lo = read_pod<std::int32_t>(is);
  f.k_hi = read_pod<std::int32_t>(is);
  f.nu = static_cast<int>(read_pod<std::uint32_t>(is));
  f.fs = read_pod<double>(is);
  f.T = read_pod<double>(is);
  f.noise_std = read_pod<double>(is);
  f.seed = read_pod<std::uint64_t>(is);
  const auto n_angles = read_pod<std::uint32_t>(is);
  f.angles.resize(n_angles);
  for (SteeringAngle& a : f.angles) {
    a.theta_x = read_pod<double>(is);
    a.theta_y = read_pod<double>(is);
  }
  f.active.resize(n_active);
  for (int& idx : f.active) idx = static_cast<int>(read_pod<std::uint32_t>(is));
  f.data.resize(n_angles);
  const std::size_t per_block = static_cast<std::size_t>(n_active) * f.band_count();
  for (std::vector<cplx>& block : f.data) {
    block.resize(per_block);
    for (cplx& v : block) {
      const float re = read_pod<float>(is);
      const float im = read_pod<float>(is);
      v = cplx(re, im);
    }
  }
  return f;
}

}  // namespace vbeam
