#pragma once

#include <algorithm>
#include <complex>
#include <cstdint>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace vbeam {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Invalid or inconsistent user input: bad config values, mismatched files,
/// unsupported parameter combinations. CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Numeric failure during computation: degenerate geometry, missing band
/// coefficients, non-physical intermediate values. CLI exit code 3.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

inline double amplitude_db(double ratio) { return 20.0 * std::log10(ratio); }
inline double power_db(double ratio) { return 10.0 * std::log10(ratio); }

/// FNV-1a 64-bit running hash; used for content hashes of geometry/LUT
/// configurations so stale tables are rejected instead of silently reused.
struct Fnv1a {
  std::uint64_t state = 1469598103934665603ull;

  void feed(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      state ^= p[i];
      state *= 1099511628211ull;
    }
  }
  void feed_u32(std::uint32_t v) { feed(&v, sizeof v); }
  void feed_u64(std::uint64_t v) { feed(&v, sizeof v); }
  void feed_f64(double v) { feed(&v, sizeof v); }
};

/// Deterministic Gaussian stream. Box-Muller over mt19937_64 is spelled out
/// here because std::normal_distribution's sample sequence is
/// implementation-defined, and reproducibility across toolchains is part of
/// the pipeline's determinism contract.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : gen_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // u1 in (0,1], u2 in [0,1)
    double u1 = 0.0;
    do {
      u1 = std::ldexp(static_cast<double>(gen_() >> 11), -53);
    } while (u1 <= 0.0);
    const double u2 = std::ldexp(static_cast<double>(gen_() >> 11), -53);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * kPi * u2;
    spare_ = r * std::sin(phi);
    have_spare_ = true;
    return r * std::cos(phi);
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// Seed mixing for per-(angle, element) noise substreams.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  Fnv1a h;
  h.feed_u64(base);
  h.feed_u64(a);
  h.feed_u64(b);
  return h.state;
}

inline double relative_l2(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw NumericError("relative_l2: length mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    num += d * d;
    den += b[i] * b[i];
  }
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::sqrt(num / den);
}

}  // namespace vbeam
