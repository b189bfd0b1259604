#pragma once

#include "vbeam/fdbf.hpp"
#include "vbeam/fft.hpp"
#include "vbeam/pulse.hpp"
#include "vbeam/time_beamformer.hpp"

namespace vbeam {

/// Partial-Fourier measurement model c = A b with A = H D: H diagonal with
/// the pulse's Fourier coefficients h[k] over [0, T], D the selected rows of
/// the N-point forward DFT. A is applied through FFTs; it is never stored
/// densely.
struct MeasurementSystem {
  std::vector<int> kappa;   // measured coefficient indices, strictly increasing
  std::vector<cplx> h;      // pulse coefficients h[k] for k in kappa
  int grid_n = 0;           // delay grid size N
  double T = 0.0;

  std::size_t size() const { return kappa.size(); }
};

inline MeasurementSystem build_system(const Pulse& pulse, const std::vector<int>& kappa,
                                      int grid_n, double T) {
  if (grid_n < 2) throw ConfigError("measurement system needs a grid of at least 2 samples");
  if (kappa.empty()) throw ConfigError("coefficient set is empty");
  const std::vector<cplx> hs = pulse_spectrum(pulse, grid_n);
  double hmax = 0.0;
  for (const cplx& v : hs) hmax = std::max(hmax, std::abs(v));
  MeasurementSystem sys;
  sys.kappa = kappa;
  sys.grid_n = grid_n;
  sys.T = T;
  sys.h.reserve(kappa.size());
  int prev = -1;
  for (int k : kappa) {
    if (k < 0 || k >= grid_n) throw ConfigError("coefficient index outside [0, N-1]");
    if (k <= prev) throw ConfigError("coefficient set must be strictly increasing");
    prev = k;
    const cplx hk = hs[static_cast<std::size_t>(k)];
    // Bins more than 80 dB below the spectral peak are far outside any usable
    // band (the default band cutoff is -24 dB); weighting by 1/|h| there only
    // amplifies noise, so treat such a set as a configuration mistake.
    if (std::abs(hk) < 1e-4 * hmax)
      throw ConfigError("coefficient set includes a bin where the pulse spectrum vanishes");
    sys.h.push_back(hk);
  }
  return sys;
}

/// A b for a full-length coefficient vector b.
inline std::vector<cplx> apply_system(const MeasurementSystem& sys, const std::vector<cplx>& b) {
  if (b.size() != static_cast<std::size_t>(sys.grid_n))
    throw ConfigError("coefficient vector length must equal the grid size");
  const std::vector<cplx> spec = fft(b);
  std::vector<cplx> out(sys.size());
  for (std::size_t i = 0; i < sys.size(); ++i)
    out[i] = sys.h[i] * spec[static_cast<std::size_t>(sys.kappa[i])];
  return out;
}

struct SolverParams {
  int stages = 5;
  int max_iters = 2000;
  double mu_hi_rel = 1e-1;   // first smoothing level relative to the data scale
  double mu_lo_rel = 1e-4;   // last smoothing level
  double tol = 1e-8;         // relative change of windowed objective means
  int window = 10;           // iterations averaged by the stopping rule
};

struct SparseBeam {
  std::vector<cplx> b;       // delay-grid amplitudes, length N
  double residual = 0.0;     // ||A b - c||_2 at return
  double epsilon = 0.0;
  int iterations = 0;        // total inner iterations
  bool converged = false;
  std::vector<double> stage_mu;
  std::vector<int> stage_iterations;
  std::vector<double> stage_l1;        // ||b||_1 at each stage end
  std::vector<double> stage_residual;  // ||A b - c||_2 at each stage end
};

namespace recovery_detail {

/// Projection of v onto {x : ||A x - c||_2 <= eps}. Diagonalizes in the DFT
/// domain: bins outside kappa are untouched; bins in kappa shrink toward the
/// data with a common multiplier theta found by a safeguarded Newton solve of
/// ||r(theta)|| = eps, where the residual per bin is (h V - c) / (1 + theta
/// N |h|^2). eps <= 0 requests exact interpolation (h X = c on kappa).
inline std::vector<cplx> project_feasible(const MeasurementSystem& sys,
                                          const std::vector<cplx>& v, const std::vector<cplx>& c,
                                          double eps) {
  const int n = sys.grid_n;
  std::vector<cplx> spec = fft(v);
  const std::size_t m = sys.size();
  std::vector<double> n2(m), h2(m);
  double r0 = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const cplx r = sys.h[i] * spec[static_cast<std::size_t>(sys.kappa[i])] - c[i];
    n2[i] = std::norm(r);
    h2[i] = std::norm(sys.h[i]);
    r0 += n2[i];
  }
  if (r0 <= eps * eps) return v;

  if (eps <= 0.0) {
    for (std::size_t i = 0; i < m; ++i)
      spec[static_cast<std::size_t>(sys.kappa[i])] = c[i] / sys.h[i];
    return ifft(spec);
  }

  // g(theta) = sum n2 / (1 + theta N h2)^2 is strictly decreasing to 0, so a
  // unique root of g = eps^2 exists. Newton on phi = g^{-1/2} - 1/eps (convex,
  // increasing) with a growth fallback keeps iterates bracketed.
  double theta = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    double g = 0.0, gp = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double den = 1.0 + theta * n * h2[i];
      const double d2 = den * den;
      g += n2[i] / d2;
      gp += -2.0 * n * h2[i] * n2[i] / (d2 * den);
    }
    const double rnorm = std::sqrt(g);
    if (rnorm <= eps * (1.0 + 1e-12)) break;
    const double phi = 1.0 / rnorm - 1.0 / eps;
    const double phip = -0.5 * gp / (g * rnorm);
    double step = phip != 0.0 ? -phi / phip : 0.0;
    if (!(step > 0.0)) step = theta > 0.0 ? theta : 1.0 / (n * *std::max_element(h2.begin(), h2.end()));
    theta += step;
  }
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t k = static_cast<std::size_t>(sys.kappa[i]);
    const double den = 1.0 + theta * n * h2[i];
    spec[k] = (spec[k] + theta * double(n) * std::conj(sys.h[i]) * c[i]) / den;
  }
  return ifft(spec);
}

inline double residual_norm(const MeasurementSystem& sys, const std::vector<cplx>& b,
                            const std::vector<cplx>& c) {
  const std::vector<cplx> ab = apply_system(sys, b);
  double acc = 0.0;
  for (std::size_t i = 0; i < ab.size(); ++i) acc += std::norm(ab[i] - c[i]);
  return std::sqrt(acc);
}

inline double l1_norm(const std::vector<cplx>& b) {
  double acc = 0.0;
  for (const cplx& v : b) acc += std::abs(v);
  return acc;
}

/// Huber-smoothed l1 value and gradient at smoothing level mu.
inline double huber_objective(const std::vector<cplx>& x, double mu, std::vector<cplx>& grad) {
  double f = 0.0;
  grad.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = std::abs(x[i]);
    if (a <= mu) {
      f += 0.5 * a * a / mu;
      grad[i] = x[i] / mu;
    } else {
      f += a - 0.5 * mu;
      grad[i] = x[i] / a;
    }
  }
  return f;
}

}  // namespace recovery_detail

/// min ||b||_1 subject to ||A b - c||_2 <= eps, by Nesterov-smoothed descent
/// with geometric continuation on the smoothing level. Deterministic for
/// fixed inputs. The best iterate is returned flagged non-converged if the
/// iteration budget runs out before the stopping rule fires.
inline SparseBeam solve_l1(const MeasurementSystem& sys, const std::vector<cplx>& c, double eps,
                           const SolverParams& params = {}) {
  using namespace recovery_detail;
  if (c.size() != sys.size())
    throw ConfigError("measurement vector length does not match the coefficient set");
  if (params.stages < 1 || params.max_iters < 1) throw ConfigError("solver budget must be positive");

  SparseBeam out;
  out.epsilon = eps;
  const int n = sys.grid_n;

  // Minimum-norm feasible start: interpolate the data on kappa, zero elsewhere.
  std::vector<cplx> spec0(static_cast<std::size_t>(n), cplx(0.0, 0.0));
  for (std::size_t i = 0; i < sys.size(); ++i)
    spec0[static_cast<std::size_t>(sys.kappa[i])] = c[i] / sys.h[i];
  std::vector<cplx> x = ifft(spec0);

  double x0max = 0.0;
  for (const cplx& v : x) x0max = std::max(x0max, std::abs(v));
  if (x0max == 0.0) {
    // Zero data: the zero vector is optimal whenever it is feasible.
    out.b.assign(static_cast<std::size_t>(n), cplx(0.0, 0.0));
    out.residual = residual_norm(sys, out.b, c);
    out.converged = out.residual <= eps * (1.0 + 1e-9) + 1e-300;
    return out;
  }

  const double log_hi = std::log10(params.mu_hi_rel);
  const double log_lo = std::log10(params.mu_lo_rel);
  std::vector<cplx> grad, yk, zk, wsum;
  bool budget_hit = false;
  for (int stage = 0; stage < params.stages; ++stage) {
    const double frac = params.stages > 1 ? double(stage) / (params.stages - 1) : 0.0;
    const double mu = x0max * std::pow(10.0, log_hi + (log_lo - log_hi) * frac);
    out.stage_mu.push_back(mu);

    const std::vector<cplx> x_anchor = x;
    wsum.assign(x.size(), cplx(0.0, 0.0));
    std::vector<double> fhist;
    int it = 0;
    bool stagnated = false;
    for (; it < params.max_iters; ++it) {
      const double f = huber_objective(x, mu, grad);

      yk = x;
      for (std::size_t i = 0; i < x.size(); ++i) yk[i] -= mu * grad[i];
      yk = project_feasible(sys, yk, c, eps);

      const double w = 0.5 * (it + 1);
      for (std::size_t i = 0; i < x.size(); ++i) wsum[i] += w * grad[i];
      zk = x_anchor;
      for (std::size_t i = 0; i < x.size(); ++i) zk[i] -= mu * wsum[i];
      zk = project_feasible(sys, zk, c, eps);

      const double tk = 2.0 / (it + 3.0);
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = tk * zk[i] + (1.0 - tk) * yk[i];

      fhist.push_back(f);
      const int w2 = params.window;
      if (static_cast<int>(fhist.size()) >= 2 * w2) {
        double recent = 0.0, prior = 0.0;
        for (int j = 0; j < w2; ++j) {
          recent += fhist[fhist.size() - 1 - j];
          prior += fhist[fhist.size() - 1 - w2 - j];
        }
        if (std::abs(prior - recent) <= params.tol * std::max(1e-300, std::abs(prior))) {
          stagnated = true;
          ++it;
          break;
        }
      }
    }
    x = project_feasible(sys, yk, c, eps);
    out.iterations += it;
    out.stage_iterations.push_back(it);
    out.stage_l1.push_back(l1_norm(x));
    out.stage_residual.push_back(residual_norm(sys, x, c));
    if (!stagnated && it >= params.max_iters) budget_hit = true;
  }

  out.b = std::move(x);
  out.residual = residual_norm(sys, out.b, c);
  out.converged = !budget_hit && out.residual <= eps * (1.0 + 1e-9) + 1e-300;
  return out;
}

/// Real band-limited signal with the given Fourier coefficients on kappa:
/// out[n] = 2 Re sum_{k in kappa} c_k e^{+i 2 pi k n / N}. Assumes kappa holds
/// positive-frequency bins only; the conjugate half is implied.
inline std::vector<double> band_signal(const std::vector<int>& kappa, const std::vector<cplx>& c,
                                       int grid_n) {
  if (kappa.size() != c.size()) throw ConfigError("coefficient set and values differ in length");
  std::vector<cplx> spec(static_cast<std::size_t>(grid_n), cplx(0.0, 0.0));
  for (std::size_t i = 0; i < kappa.size(); ++i) {
    if (kappa[i] <= 0 || kappa[i] >= grid_n / 2)
      throw ConfigError("band synthesis expects strictly positive-frequency bins");
    spec[static_cast<std::size_t>(kappa[i])] = c[i];
  }
  const std::vector<cplx> t = ifft(spec);
  std::vector<double> out(static_cast<std::size_t>(grid_n));
  for (int i = 0; i < grid_n; ++i)
    out[static_cast<std::size_t>(i)] = 2.0 * grid_n * t[static_cast<std::size_t>(i)].real();
  return out;
}

/// Re-incorporates the full pulse shape: Phi(t) = sum_l Re(b_l) h(t - l T_s)
/// on the f_s grid, as a circular convolution (supports that touch the end of
/// the window wrap; validated phantoms keep reflectors clear of the edge).
inline Beam beam_from_sparse(const SparseBeam& sparse, const Pulse& pulse,
                             const SteeringAngle& angle) {
  const int n = static_cast<int>(sparse.b.size());
  if (n == 0) throw ConfigError("sparse beam is empty");
  if (static_cast<int>(pulse.samples.size()) > n)
    throw ConfigError("pulse longer than the delay grid");
  std::vector<double> amp(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) amp[static_cast<std::size_t>(i)] = sparse.b[static_cast<std::size_t>(i)].real();
  std::vector<double> hg(static_cast<std::size_t>(n), 0.0);
  std::copy(pulse.samples.begin(), pulse.samples.end(), hg.begin());
  const std::vector<cplx> fa = fft_real(amp);
  const std::vector<cplx> fh = fft_real(hg);
  std::vector<cplx> prod(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) prod[static_cast<std::size_t>(i)] = fa[static_cast<std::size_t>(i)] * fh[static_cast<std::size_t>(i)];
  Beam beam;
  beam.angle = angle;
  beam.samples = ifft_expect_real(prod, 1e-9);
  beam.support = pulse.sample_period() * n;
  return beam;
}

/// Model-fitted coefficients A b of a recovered amplitude vector, for
/// band-limited re-synthesis.
inline std::vector<cplx> fitted_coefficients(const MeasurementSystem& sys,
                                             const SparseBeam& sparse) {
  return apply_system(sys, sparse.b);
}

/// Band-limited re-synthesis: the recovered beam restricted to the measured
/// band, with the pulse spectrum re-applied through the measurement model.
inline Beam beam_from_fitted_band(const MeasurementSystem& sys, const SparseBeam& sparse,
                                  const SteeringAngle& angle) {
  Beam beam;
  beam.angle = angle;
  beam.samples = band_signal(sys.kappa, fitted_coefficients(sys, sparse), sys.grid_n);
  beam.support = sys.T;
  return beam;
}

/// Direct inverse-transform path for a full effective band: zero-fills the
/// out-of-band bins, applies conjugate symmetry, and inverse transforms.
/// Errors if the spectrum covers only part of the effective band.
inline Beam beam_from_full_band(const BeamSpectrum& spectrum,
                                const CoefficientBandIndices& full_band) {
  if (spectrum.band.k_lo != full_band.k_lo || spectrum.band.k_hi != full_band.k_hi)
    throw ConfigError("full-band inverse requires the entire effective band");
  std::vector<int> kappa(static_cast<std::size_t>(spectrum.band.count()));
  for (int i = 0; i < spectrum.band.count(); ++i) kappa[static_cast<std::size_t>(i)] = spectrum.band.k_lo + i;
  Beam beam;
  beam.angle = spectrum.angle;
  beam.samples = band_signal(kappa, spectrum.values, spectrum.grid_n);
  beam.support = spectrum.T;
  return beam;
}

}  // namespace vbeam
