#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <thread>

#include "vbeam/acquisition.hpp"
#include "vbeam/config.hpp"
#include "vbeam/fdbf.hpp"
#include "vbeam/metrics.hpp"
#include "vbeam/recovery.hpp"
#include "vbeam/report.hpp"
#include "vbeam/volume.hpp"

namespace vbeam {

/// Resolved processing plan for one run: the beamforming method, the full
/// effective band beta, and the measured subset (contiguous, centered).
struct MethodPlan {
  BeamformMethod method = BeamformMethod::kTime;
  CoefficientBandIndices beta;
  CoefficientBandIndices beam_band;
  bool use_l1 = false;
  std::string label;
};

inline MethodPlan plan_method(const RunConfig& cfg, const Pulse& pulse) {
  MethodPlan p;
  if (cfg.method == "time") {
    p.label = "time-" + cfg.active_mode;
    return p;
  }
  p.method = BeamformMethod::kFrequency;
  p.beta = effective_band(pulse, cfg.samples, cfg.cutoff_db);
  int count = 0;
  std::string suffix;
  if (cfg.kappa == "full") {
    count = p.beta.count();
    suffix = "full";
  } else if (cfg.kappa == "half") {
    count = static_cast<int>(std::lround(p.beta.count() / 2.0));
    suffix = "half";
  } else if (cfg.kappa == "third") {
    count = static_cast<int>(std::lround(p.beta.count() / 3.0));
    suffix = "third";
  } else {
    count = static_cast<int>(config_detail::to_long("method", "kappa", cfg.kappa));
    suffix = "k" + cfg.kappa;
  }
  const std::vector<int> sub = centered_subset(p.beta, count);
  p.beam_band.k_lo = sub.front();
  p.beam_band.k_hi = sub.back();
  p.beam_band.peak = p.beta.peak;
  const bool full = p.beam_band.count() == p.beta.count();
  if (cfg.recover == "inverse" && !full)
    throw ConfigError("inverse recovery requires the full effective band");
  p.use_l1 = cfg.recover == "l1" || (cfg.recover == "auto" && !full);
  p.label = "fdbf-" + suffix;
  return p;
}

/// Per-angle solver diagnostics for the run report.
struct AngleDiag {
  bool used = false;
  int iterations = 0;
  double residual = 0.0;
  double epsilon = 0.0;
  bool converged = true;
  std::vector<int> stage_iterations;
  std::vector<double> stage_l1;
  std::vector<double> stage_residual;
};

/// Shared read-only context for processing beams. Per-angle distortion
/// tables are built on demand inside workers: a full-raster table at release
/// scale would not fit in memory, and each table is cheap relative to its
/// angle's solve.
class PipelineContext {
 public:
  explicit PipelineContext(const RunConfig& cfg)
      : cfg_(cfg),
        geom_(cfg.build_geometry()),
        pulse_(cfg.build_pulse()),
        T_(cfg.duration()) {
    if (static_cast<int>(pulse_.samples.size()) > cfg.samples)
      throw ConfigError("pulse longer than the record grid");
    plan_ = plan_method(cfg, pulse_);
    if (plan_.method == BeamformMethod::kFrequency) {
      elem_band_ = element_band_for(plan_.beam_band, cfg.l_neg, cfg.l_pos);
      if (elem_band_.k_lo < 0 || elem_band_.k_hi >= cfg.samples)
        throw ConfigError("distortion window reaches outside the DFT grid");
      lut_params_.l_neg = cfg.l_neg;
      lut_params_.l_pos = cfg.l_pos;
      if (!cfg.lut_path.empty()) use_lut_file(cfg.lut_path, cfg.scan_angles());
    } else if (!cfg.lut_path.empty()) {
      throw ConfigError("a distortion table applies only to frequency-domain methods");
    }
  }

  /// Loads a prebuilt distortion table and validates its content hash against
  /// the configured geometry, band, and scan raster. A mismatched table is a
  /// hard error, never a silent rebuild.
  void use_lut_file(const std::string& path, const std::vector<SteeringAngle>& raster) {
    auto lut = std::make_shared<DistortionLut>(read_lut(path));
    const std::uint64_t expect = lut_config_hash(geom_, T_, raster, plan_.beam_band.k_lo,
                                                 plan_.beam_band.count(), lut_params_);
    if (lut->config_hash != expect)
      throw ConfigError("distortion table does not match the configured geometry/band/raster: " +
                        path);
    preloaded_ = std::move(lut);
  }

  const RunConfig& cfg() const { return cfg_; }
  const ArrayGeometry& geometry() const { return geom_; }
  const Pulse& pulse() const { return pulse_; }
  const MethodPlan& plan() const { return plan_; }
  const CoefficientBandIndices& element_band() const { return elem_band_; }
  double T() const { return T_; }

  DistortionLut make_lut(const SteeringAngle& angle) const {
    if (preloaded_) {
      for (std::size_t ai = 0; ai < preloaded_->angles.size(); ++ai)
        if (std::abs(preloaded_->angles[ai].theta_x - angle.theta_x) < 1e-12 &&
            std::abs(preloaded_->angles[ai].theta_y - angle.theta_y) < 1e-12)
          return slice_lut(*preloaded_, ai);
      throw ConfigError("angle missing from the preloaded distortion table");
    }
    return build_lut(geom_, T_, {angle}, plan_.beam_band.k_lo, plan_.beam_band.count(),
                     lut_params_);
  }

  /// One-angle copy out of a multi-angle table.
  DistortionLut slice_lut(const DistortionLut& full, std::size_t ai) const {
    DistortionLut one;
    one.rows = full.rows;
    one.cols = full.cols;
    one.l_neg = full.l_neg;
    one.l_pos = full.l_pos;
    one.k_first = full.k_first;
    one.k_count = full.k_count;
    one.T = full.T;
    one.tail_ratio = full.tail_ratio;
    one.angles = {full.angles[ai]};
    one.active = full.active;
    one.supports = {full.supports[ai]};
    one.config_hash = lut_config_hash(geom_, T_, one.angles, full.k_first, full.k_count,
                                      lut_params_);
    const std::size_t per_angle =
        full.active.size() * static_cast<std::size_t>(full.k_count) * full.window();
    one.values.assign(full.values.begin() + ai * per_angle,
                      full.values.begin() + (ai + 1) * per_angle);
    return one;
  }

  /// Low-rate front end over all records: each element's band is acquired
  /// from its nu retained samples; only those coefficients flow downstream.
  std::vector<std::vector<cplx>> acquire_all(
      const std::vector<std::vector<double>>& records) const {
    std::vector<std::vector<cplx>> out;
    out.reserve(records.size());
    for (const std::vector<double>& rec : records)
      out.push_back(band_coefficients(acquire_band(rec, elem_band_)));
    return out;
  }

  /// Feasibility radius for the l1 solve: a safety factor times the expected
  /// noise norm on the measured beam coefficients, propagated through the
  /// distortion tables; a small relative floor when noiseless.
  double epsilon_for(const DistortionLut& lut, const std::vector<cplx>& c, double sigma) const {
    if (sigma > 0.0) {
      const double nrx = static_cast<double>(geom_.active.size());
      double total = 0.0;
      for (int k = plan_.beam_band.k_lo; k <= plan_.beam_band.k_hi; ++k) {
        double q2 = 0.0;
        for (std::size_t ei = 0; ei < geom_.active.size(); ++ei) {
          const cplx* q = lut.at(0, ei, k);
          for (int l = 0; l < lut.window(); ++l) q2 += std::norm(q[l]);
        }
        total += (sigma * sigma / cfg_.samples) * q2 / (nrx * nrx);
      }
      return cfg_.epsilon_scale * std::sqrt(total);
    }
    double norm2 = 0.0;
    for (const cplx& v : c) norm2 += std::norm(v);
    return cfg_.epsilon_noiseless_rel * std::sqrt(norm2);
  }

  Beam recover_beam(const BeamSpectrum& spec, const DistortionLut& lut, double sigma,
                    AngleDiag* diag) const {
    if (!plan_.use_l1) return beam_from_full_band(spec, plan_.beta);
    std::vector<int> kappa(static_cast<std::size_t>(plan_.beam_band.count()));
    for (int i = 0; i < plan_.beam_band.count(); ++i)
      kappa[static_cast<std::size_t>(i)] = plan_.beam_band.k_lo + i;
    const MeasurementSystem sys = build_system(pulse_, kappa, cfg_.samples, T_);
    const double eps = epsilon_for(lut, spec.values, sigma);
    const SparseBeam sol = solve_l1(sys, spec.values, eps, cfg_.solver);
    if (diag) {
      diag->used = true;
      diag->iterations = sol.iterations;
      diag->residual = sol.residual;
      diag->epsilon = eps;
      diag->converged = sol.converged;
      diag->stage_iterations = sol.stage_iterations;
      diag->stage_l1 = sol.stage_l1;
      diag->stage_residual = sol.stage_residual;
    }
    if (cfg_.resynthesis == "band") return beam_from_fitted_band(sys, sol, spec.angle);
    return beam_from_sparse(sol, pulse_, spec.angle);
  }

  std::vector<double> process_coeffs(const std::vector<std::vector<cplx>>& coeffs,
                                     const SteeringAngle& angle, double sigma,
                                     AngleDiag* diag) const {
    const DistortionLut lut = make_lut(angle);
    const BeamSpectrum spec = beamform_frequency_coeffs(coeffs, elem_band_, lut, 0,
                                                        plan_.beam_band, T_, cfg_.samples);
    return recover_beam(spec, lut, sigma, diag).samples;
  }

  std::vector<double> process_records(const std::vector<std::vector<double>>& records,
                                      const SteeringAngle& angle, double sigma,
                                      AngleDiag* diag) const {
    if (plan_.method == BeamformMethod::kTime)
      return beamform_time(records, geom_, angle, cfg_.fs, cfg_.interp()).samples;
    return process_coeffs(acquire_all(records), angle, sigma, diag);
  }

 private:
  RunConfig cfg_;
  ArrayGeometry geom_;
  Pulse pulse_;
  double T_ = 0.0;
  MethodPlan plan_;
  CoefficientBandIndices elem_band_;
  LutBuildParams lut_params_;
  std::shared_ptr<const DistortionLut> preloaded_;
};

/// Noise std in record units: either absolute, or relative to the peak clean
/// record amplitude (which is transmit-independent, so one clean synthesis
/// resolves it).
inline double resolve_noise_std(const RunConfig& cfg, const ArrayGeometry& g, const Phantom& ph,
                                const Pulse& pulse) {
  if (cfg.noise_std_rel <= 0.0) return cfg.noise_std;
  const SynthesisResult clean = synthesize_element_signals(g, ph, pulse, cfg.samples);
  double peak = 0.0;
  for (const auto& rec : clean.records)
    for (double v : rec) peak = std::max(peak, std::abs(v));
  if (!(peak > 0.0)) throw NumericError("cannot scale noise: phantom yields all-zero records");
  return cfg.noise_std_rel * peak;
}

struct PipelineResult {
  Volume volume;
  json report;
  int non_converged = 0;
};

namespace pipeline_detail {

template <typename Fn>
void parallel_for_angles(std::size_t count, int workers_cfg, Fn&& body) {
  unsigned workers = workers_cfg > 0 ? static_cast<unsigned>(workers_cfg)
                                     : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run);
    for (std::thread& t : pool) t.join();
  }
  // First failing angle wins, deterministically.
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
}

inline json budget_block(const PipelineContext& ctx, std::size_t lines) {
  const RunConfig& cfg = ctx.cfg();
  const std::uint64_t n_rx = ctx.geometry().active.size();
  json b;
  b["method"] = ctx.plan().label;
  b["lines"] = lines;
  b["n_rx_eff"] = n_rx;
  b["grid_n"] = cfg.samples;
  if (ctx.plan().method == BeamformMethod::kTime) {
    b["samples_per_record"] = cfg.samples;
    b["budget"] = sample_budget(BeamformMethod::kTime, n_rx, lines, cfg.samples, 0, 0, 0);
    b["samples_consumed_total"] = b["budget"];
  } else {
    const int kappa = ctx.plan().beam_band.count();
    b["kappa"] = kappa;
    b["l_neg"] = cfg.l_neg;
    b["l_pos"] = cfg.l_pos;
    b["nu_formula"] = nu_samples(kappa, cfg.l_neg, cfg.l_pos, NuConvention::kFormula);
    b["nu_inclusive"] = nu_samples(kappa, cfg.l_neg, cfg.l_pos, NuConvention::kInclusive);
    b["nu_convention"] = cfg.nu_convention;
    b["samples_per_record"] = ctx.element_band().count();
    b["budget"] = sample_budget(BeamformMethod::kFrequency, n_rx, lines, cfg.samples, kappa,
                                cfg.l_neg, cfg.l_pos, cfg.nu_conv());
    b["budget_formula"] = sample_budget(BeamformMethod::kFrequency, n_rx, lines, cfg.samples,
                                        kappa, cfg.l_neg, cfg.l_pos, NuConvention::kFormula);
    b["budget_inclusive"] = sample_budget(BeamformMethod::kFrequency, n_rx, lines, cfg.samples,
                                          kappa, cfg.l_neg, cfg.l_pos, NuConvention::kInclusive);
    b["samples_consumed_total"] =
        static_cast<std::uint64_t>(ctx.element_band().count()) * n_rx * lines;
    b["within_inclusive_budget"] = b["samples_consumed_total"].get<std::uint64_t>() <=
                                   b["budget_inclusive"].get<std::uint64_t>();
  }
  return b;
}

inline json diag_block(const std::vector<AngleDiag>& diags,
                       const std::vector<SteeringAngle>& angles, int* non_converged) {
  json arr = json::array();
  int bad = 0;
  for (std::size_t i = 0; i < diags.size(); ++i) {
    const AngleDiag& d = diags[i];
    if (!d.used) continue;
    json j;
    j["angle_index"] = i;
    j["theta_x_deg"] = rad2deg(angles[i].theta_x);
    j["theta_y_deg"] = rad2deg(angles[i].theta_y);
    j["iterations"] = d.iterations;
    j["epsilon"] = d.epsilon;
    j["residual"] = d.residual;
    j["converged"] = d.converged;
    j["stage_iterations"] = d.stage_iterations;
    j["stage_l1"] = d.stage_l1;
    j["stage_residual"] = d.stage_residual;
    if (!d.converged) ++bad;
    arr.push_back(std::move(j));
  }
  if (non_converged) *non_converged = bad;
  return arr;
}

}  // namespace pipeline_detail

/// Full pipeline: synthesize (or re-noise) element records per transmit
/// event, beamform by the configured method, recover, and assemble the
/// volume plus a structured report. Throws before producing any result if
/// any angle fails; artifact writing is a separate step so partial volumes
/// are never written.
inline PipelineResult run_pipeline(const RunConfig& cfg) {
  const PipelineContext ctx(cfg);
  const ArrayGeometry& g = ctx.geometry();
  const Pulse& pulse = ctx.pulse();
  const Phantom ph = cfg.build_phantom();
  validate_phantom(ph, g, pulse, ctx.T());
  const double sigma = resolve_noise_std(cfg, g, ph, pulse);

  // Clean records are transmit-independent; synthesize once, re-noise per
  // angle with the angle's substreams.
  const SynthesisResult clean = synthesize_element_signals(g, ph, pulse, cfg.samples);

  const std::vector<SteeringAngle> angles = cfg.scan_angles();
  PipelineResult res;
  res.volume.theta_x = cfg.axis_angles(cfg.nx);
  res.volume.theta_y = cfg.axis_angles(cfg.ny);
  res.volume.samples = cfg.samples;
  res.volume.fs = cfg.fs;
  res.volume.T = ctx.T();
  res.volume.speed_of_sound = cfg.speed_of_sound;
  res.volume.allocate();

  std::vector<AngleDiag> diags(angles.size());
  pipeline_detail::parallel_for_angles(angles.size(), cfg.workers, [&](std::size_t i) {
    std::vector<std::vector<double>> records = clean.records;
    add_record_noise(records, g, sigma, cfg.seed, i);
    const std::vector<double> beam = ctx.process_records(records, angles[i], sigma, &diags[i]);
    res.volume.set_beam(i / static_cast<std::size_t>(cfg.ny), i % static_cast<std::size_t>(cfg.ny),
                        beam);
  });

  json rep;
  rep["config"] = ini_to_json(cfg.echo());
  json method;
  method["label"] = ctx.plan().label;
  if (ctx.plan().method == BeamformMethod::kFrequency) {
    method["band_lo"] = ctx.plan().beta.k_lo;
    method["band_hi"] = ctx.plan().beta.k_hi;
    method["band_count"] = ctx.plan().beta.count();
    method["band_peak"] = ctx.plan().beta.peak;
    method["kappa_lo"] = ctx.plan().beam_band.k_lo;
    method["kappa_hi"] = ctx.plan().beam_band.k_hi;
    method["kappa_count"] = ctx.plan().beam_band.count();
    method["use_l1"] = ctx.plan().use_l1;
    method["resynthesis"] = cfg.resynthesis;
  }
  rep["method"] = method;
  json noise;
  noise["std"] = sigma;
  noise["seed"] = cfg.seed;
  rep["noise"] = noise;
  json synth;
  synth["dropped_pairs_per_angle"] = clean.dropped.size();
  synth["angles"] = angles.size();
  rep["synthesis"] = synth;
  rep["budget"] = pipeline_detail::budget_block(ctx, angles.size());
  if (ctx.plan().use_l1) {
    rep["solver"] = pipeline_detail::diag_block(diags, angles, &res.non_converged);
    rep["non_converged"] = res.non_converged;
  }
  double rf_peak = 0.0;
  for (float v : res.volume.voxels) rf_peak = std::max(rf_peak, std::abs(static_cast<double>(v)));
  json vol;
  vol["nx"] = res.volume.nx();
  vol["ny"] = res.volume.ny();
  vol["samples"] = res.volume.samples;
  vol["rf_peak"] = rf_peak;
  rep["volume"] = vol;
  res.report = std::move(rep);
  return res;
}

/// Writes the run artifacts (volume container, cross-section images, report,
/// center-line CSV) into cfg.out_dir.
inline void write_artifacts(const RunConfig& cfg, const PipelineResult& res) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  const std::string dir = cfg.out_dir + "/";
  if (cfg.write_volume_file) write_volume(dir + "volume.vbv1", res.volume);
  if (cfg.write_images) {
    write_pgm16(dir + "slice_theta_y0.pgm",
                cross_section(res.volume, 0, cfg.image_width, cfg.image_height, cfg.range_db));
    if (res.volume.ny() > 1)
      write_pgm16(dir + "slice_theta_x0.pgm",
                  cross_section(res.volume, 1, cfg.image_width, cfg.image_height, cfg.range_db));
  }
  if (cfg.write_report) write_json_file(dir + "report.json", res.report);
  if (cfg.write_csv) {
    const std::size_t ix = nearest_index(res.volume.theta_x, 0.0);
    const std::size_t iy = nearest_index(res.volume.theta_y, 0.0);
    const std::vector<double> beam = res.volume.beam(ix, iy);
    std::vector<double> t(beam.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = 1e6 * i / cfg.fs;
    write_csv_curve(dir + "center_beam.csv", "time_us", "rf", t, beam);
    write_csv_curve(dir + "center_envelope.csv", "time_us", "envelope", t,
                    analytic_envelope(beam));
  }
}

/// Whole-raster synthesis into a frame container (CLI `simulate`). Intended
/// for scales where the raster fits in memory; the full pipeline streams
/// instead.
inline FrameSet synthesize_frames(const RunConfig& cfg) {
  const ArrayGeometry g = cfg.build_geometry();
  const Pulse pulse = cfg.build_pulse();
  const Phantom ph = cfg.build_phantom();
  validate_phantom(ph, g, pulse, cfg.duration());
  const double sigma = resolve_noise_std(cfg, g, ph, pulse);
  const SynthesisResult clean = synthesize_element_signals(g, ph, pulse, cfg.samples);

  FrameSet f;
  f.rows = cfg.rows;
  f.cols = cfg.cols;
  f.samples = cfg.samples;
  f.fs = cfg.fs;
  f.T = cfg.duration();
  f.noise_std = sigma;
  f.seed = cfg.seed;
  f.active = g.active;
  f.angles = cfg.scan_angles();
  f.data.resize(f.angles.size());
  for (std::size_t i = 0; i < f.angles.size(); ++i) {
    std::vector<std::vector<double>> records = clean.records;
    add_record_noise(records, g, sigma, cfg.seed, i);
    std::vector<float>& block = f.data[i];
    block.resize(records.size() * static_cast<std::size_t>(cfg.samples));
    for (std::size_t e = 0; e < records.size(); ++e)
      for (int s = 0; s < cfg.samples; ++s)
        block[e * cfg.samples + s] = static_cast<float>(records[e][static_cast<std::size_t>(s)]);
  }
  return f;
}

/// Low-rate acquisition over a frame container (CLI `simulate --low-rate`
/// and the `recover` input path).
inline BandFrameSet acquire_frames(const PipelineContext& ctx, const FrameSet& frames) {
  if (ctx.plan().method != BeamformMethod::kFrequency)
    throw ConfigError("band acquisition requires a frequency-domain method configuration");
  BandFrameSet b;
  b.rows = frames.rows;
  b.cols = frames.cols;
  b.grid_n = frames.samples;
  b.k_lo = ctx.element_band().k_lo;
  b.k_hi = ctx.element_band().k_hi;
  b.nu = ctx.element_band().count();
  b.fs = frames.fs;
  b.T = frames.T;
  b.noise_std = frames.noise_std;
  b.seed = frames.seed;
  b.active = frames.active;
  b.angles = frames.angles;
  b.data.resize(frames.angles.size());
  for (std::size_t i = 0; i < frames.angles.size(); ++i) {
    const std::vector<std::vector<cplx>> coeffs = ctx.acquire_all(frames.records_for_angle(i));
    std::vector<cplx>& block = b.data[i];
    block.reserve(coeffs.size() * static_cast<std::size_t>(b.band_count()));
    for (const std::vector<cplx>& c : coeffs) block.insert(block.end(), c.begin(), c.end());
  }
  return b;
}

/// Checks that a frame container matches the run configuration it is being
/// processed under. Mismatches are configuration errors, never reconciled
/// silently.
inline void check_frames_match(const PipelineContext& ctx, int rows, int cols, int samples,
                               double fs, const std::vector<int>& active) {
  const RunConfig& cfg = ctx.cfg();
  if (rows != cfg.rows || cols != cfg.cols)
    throw ConfigError("frame grid does not match the configured geometry");
  if (samples != cfg.samples) throw ConfigError("frame length does not match pulse.samples");
  if (fs != cfg.fs) throw ConfigError("frame sample rate does not match pulse.fs");
  if (active != ctx.geometry().active)
    throw ConfigError("frame active set does not match the configured geometry");
}

/// Beamforms a frame container into a volume (CLI `beamform` / `recover`).
/// The frame angles must form the configured raster in row-major order.
inline PipelineResult frames_to_volume(const PipelineContext& ctx, const FrameSet* frames,
                                       const BandFrameSet* bands) {
  const RunConfig& cfg = ctx.cfg();
  const std::vector<SteeringAngle> expect = cfg.scan_angles();
  const std::vector<SteeringAngle>& got = frames ? frames->angles : bands->angles;
  if (got.size() != expect.size()) throw ConfigError("frame raster does not match scan.nx/ny");
  for (std::size_t i = 0; i < got.size(); ++i)
    if (std::abs(got[i].theta_x - expect[i].theta_x) > 1e-12 ||
        std::abs(got[i].theta_y - expect[i].theta_y) > 1e-12)
      throw ConfigError("frame raster angles do not match the configured scan");
  if (frames)
    check_frames_match(ctx, frames->rows, frames->cols, frames->samples, frames->fs,
                       frames->active);
  else
    check_frames_match(ctx, bands->rows, bands->cols, bands->grid_n, bands->fs, bands->active);
  if (bands) {
    if (ctx.plan().method != BeamformMethod::kFrequency)
      throw ConfigError("coefficient-band input requires a frequency-domain method");
    if (bands->k_lo != ctx.element_band().k_lo || bands->k_hi != ctx.element_band().k_hi)
      throw ConfigError("stored coefficient band does not match the configured band/window");
  }
  const double sigma = frames ? frames->noise_std : bands->noise_std;

  PipelineResult res;
  res.volume.theta_x = cfg.axis_angles(cfg.nx);
  res.volume.theta_y = cfg.axis_angles(cfg.ny);
  res.volume.samples = cfg.samples;
  res.volume.fs = cfg.fs;
  res.volume.T = ctx.T();
  res.volume.speed_of_sound = cfg.speed_of_sound;
  res.volume.allocate();
  std::vector<AngleDiag> diags(got.size());
  pipeline_detail::parallel_for_angles(got.size(), cfg.workers, [&](std::size_t i) {
    std::vector<double> beam;
    if (frames)
      beam = ctx.process_records(frames->records_for_angle(i), got[i], sigma, &diags[i]);
    else
      beam = ctx.process_coeffs(bands->coeffs_for_angle(i), got[i], sigma, &diags[i]);
    res.volume.set_beam(i / static_cast<std::size_t>(cfg.ny), i % static_cast<std::size_t>(cfg.ny),
                        beam);
  });

  json rep;
  rep["config"] = ini_to_json(cfg.echo());
  rep["method"]["label"] = ctx.plan().label;
  rep["budget"] = pipeline_detail::budget_block(ctx, got.size());
  if (ctx.plan().use_l1) {
    rep["solver"] = pipeline_detail::diag_block(diags, got, &res.non_converged);
    rep["non_converged"] = res.non_converged;
  }
  res.report = std::move(rep);
  return res;
}

}  // namespace vbeam
