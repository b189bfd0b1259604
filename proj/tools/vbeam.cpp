#include <CLI11.hpp>

#include <iostream>

#include "vbeam/vbeam.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "Config file; omit for the built-in defaults");
  cmd->add_option("--set", opts.sets, "Override a config key: section.key=value")
      ->take_all();
}

vbeam::RunConfig make_config(const CommonOpts& opts) {
  vbeam::IniMap ini;
  if (!opts.config_path.empty()) ini = vbeam::parse_ini_file(opts.config_path);
  for (const std::string& s : opts.sets) vbeam::apply_override(ini, s);
  return vbeam::load_config(ini);
}

int do_lut_build(const CommonOpts& common, const std::string& out, bool verify_tail) {
  vbeam::RunConfig cfg = make_config(common);
  if (cfg.method != "fdbf")
    throw vbeam::ConfigError("distortion tables apply to method=fdbf configurations");
  cfg.lut_path.clear();  // building, not loading
  const vbeam::PipelineContext ctx(cfg);
  vbeam::LutBuildParams params;
  params.l_neg = cfg.l_neg;
  params.l_pos = cfg.l_pos;
  params.verify_tail = verify_tail;
  const vbeam::DistortionLut lut =
      vbeam::build_lut(ctx.geometry(), ctx.T(), cfg.scan_angles(), ctx.plan().beam_band.k_lo,
                       ctx.plan().beam_band.count(), params);
  vbeam::write_lut(out, lut);
  std::cout << "wrote " << out << ": " << lut.angles.size() << " angles, "
            << lut.active.size() << " elements, k in [" << lut.k_first << ", "
            << lut.k_first + lut.k_count - 1 << "], window [-" << lut.l_neg << ", "
            << lut.l_pos << "]";
  if (verify_tail) std::cout << ", tail ratio " << lut.tail_ratio;
  std::cout << "\n";
  return 0;
}

int do_simulate(const CommonOpts& common, const std::string& out, bool low_rate) {
  const vbeam::RunConfig cfg = make_config(common);
  const vbeam::FrameSet frames = vbeam::synthesize_frames(cfg);
  if (low_rate) {
    const vbeam::PipelineContext ctx(cfg);
    const vbeam::BandFrameSet bands = vbeam::acquire_frames(ctx, frames);
    vbeam::write_band_frames(out, bands);
    std::cout << "wrote " << out << ": " << bands.angles.size() << " angles, "
              << bands.active.size() << " elements, " << bands.band_count()
              << " coefficients per record (low-rate)\n";
  } else {
    vbeam::write_frames(out, frames);
    std::cout << "wrote " << out << ": " << frames.angles.size() << " angles, "
              << frames.active.size() << " elements, " << frames.samples
              << " samples per record\n";
  }
  return 0;
}

int finish_volume(const vbeam::RunConfig& cfg, const vbeam::PipelineResult& res) {
  vbeam::write_artifacts(cfg, res);
  std::cout << "wrote " << cfg.out_dir << ": volume " << res.volume.nx() << "x"
            << res.volume.ny() << "x" << res.volume.samples << "\n";
  if (res.non_converged > 0) {
    std::cerr << res.non_converged << " beam(s) did not converge; see report.json\n";
    return 4;
  }
  return 0;
}

int do_beamform(const CommonOpts& common, const std::string& frames_path,
                const std::string& out_dir) {
  vbeam::RunConfig cfg = make_config(common);
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  const vbeam::PipelineContext ctx(cfg);
  const vbeam::FrameSet frames = vbeam::read_frames(frames_path);
  const vbeam::PipelineResult res = vbeam::frames_to_volume(ctx, &frames, nullptr);
  return finish_volume(cfg, res);
}

int do_recover(const CommonOpts& common, const std::string& frames_path,
               const std::string& out_dir) {
  vbeam::RunConfig cfg = make_config(common);
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  const vbeam::PipelineContext ctx(cfg);
  const vbeam::BandFrameSet bands = vbeam::read_band_frames(frames_path);
  const vbeam::PipelineResult res = vbeam::frames_to_volume(ctx, nullptr, &bands);
  return finish_volume(cfg, res);
}

int do_run(const CommonOpts& common, const std::string& out_dir) {
  vbeam::RunConfig cfg = make_config(common);
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  const vbeam::PipelineResult res = vbeam::run_pipeline(cfg);
  return finish_volume(cfg, res);
}

int do_metrics(const CommonOpts& common, const std::string& volume_path,
               const std::string& reference_path, const std::string& out_dir) {
  namespace fs = std::filesystem;
  const vbeam::RunConfig cfg = make_config(common);
  const vbeam::Volume vol = vbeam::read_volume(volume_path);
  fs::create_directories(out_dir);
  const std::string dir = out_dir + "/";

  vbeam::json m;
  std::vector<std::vector<std::string>> rows;
  auto fmt = [](double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
  };
  int measured = 0;

  if (vol.nx() >= 3) {
    try {
      const vbeam::PsfReport lat = vbeam::lateral_psf(vol, cfg.focus_mm * 1e-3);
      vbeam::write_csv_curve(dir + "psf_lateral.csv", "theta_x_deg", "normalized",
                             lat.positions, lat.curve);
      m["lateral"]["fwhm_deg"] = lat.fwhm;
      m["lateral"]["avg_side_lobe_db"] = lat.avg_side_lobe_db;
      m["lateral"]["first_side_lobe_db"] = lat.first_side_lobe_db;
      rows.push_back({"LPSF FWHM (deg)", fmt(lat.fwhm)});
      rows.push_back({"LPSF avg side lobe (dB)", fmt(lat.avg_side_lobe_db)});
      rows.push_back({"LPSF first side lobe (dB)", fmt(lat.first_side_lobe_db)});
      ++measured;
    } catch (const vbeam::NumericError& e) {
      std::cerr << "lateral PSF skipped: " << e.what() << "\n";
      m["lateral"]["error"] = e.what();
    }
  }

  const std::size_t ix = vbeam::nearest_index(vol.theta_x, 0.0);
  const std::size_t iy = vbeam::nearest_index(vol.theta_y, 0.0);
  try {
    const vbeam::PsfReport ax = vbeam::axial_psf(vol, ix, iy);
    vbeam::write_csv_curve(dir + "psf_axial.csv", "depth_mm", "normalized", ax.positions,
                           ax.curve);
    m["axial"]["fwhm_mm"] = ax.fwhm;
    m["axial"]["avg_side_lobe_db"] = ax.avg_side_lobe_db;
    rows.push_back({"APSF FWHM (mm)", fmt(ax.fwhm)});
    ++measured;
  } catch (const vbeam::NumericError& e) {
    std::cerr << "axial PSF skipped: " << e.what() << "\n";
    m["axial"]["error"] = e.what();
  }

  if (!reference_path.empty()) {
    const vbeam::Volume ref = vbeam::read_volume(reference_path);
    if (ref.nx() != vol.nx() || ref.ny() != vol.ny() || ref.samples != vol.samples)
      throw vbeam::ConfigError("reference volume dimensions do not match");
    const double wavelength = vol.speed_of_sound / cfg.f0;
    const double snr = vbeam::beam_snr(ref.beam(ix, iy), vol.beam(ix, iy), wavelength, vol.fs,
                                       vol.speed_of_sound);
    m["snr_db"] = snr;
    rows.push_back({"Beam SNR (dB)", fmt(snr)});
    ++measured;
  }

  if (measured == 0)
    throw vbeam::NumericError("no metric could be measured on this volume");
  vbeam::write_json_file(dir + "metrics.json", m);
  const std::string table = vbeam::format_table({"Metric", "Value"}, rows);
  vbeam::write_text_file(dir + "summary.txt", table);
  std::cout << table;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"3D ultrasound beamforming: time-domain reference, low-rate frequency-domain "
               "pipeline, sparse recovery, and imaging metrics"};
  app.require_subcommand(1);

  CommonOpts lut_opts;
  std::string lut_out;
  bool lut_verify = false;
  CLI::App* lut = app.add_subcommand("lut", "Distortion-table operations");
  lut->require_subcommand(1);
  CLI::App* lut_build = lut->add_subcommand("build", "Precompute distortion tables");
  add_common(lut_build, lut_opts);
  lut_build->add_option("--out", lut_out, "Output table file (.vbq1)")->required();
  lut_build->add_flag("--verify-tail", lut_verify,
                      "Also integrate coefficients beyond the window and record the tail ratio");

  CommonOpts sim_opts;
  std::string sim_out;
  bool sim_low_rate = false;
  CLI::App* sim = app.add_subcommand("simulate", "Synthesize element records for the phantom");
  add_common(sim, sim_opts);
  sim->add_option("--out", sim_out, "Output frame container (.vbf1)")->required();
  sim->add_flag("--low-rate", sim_low_rate,
                "Store low-rate coefficient bands instead of full-rate records");

  CommonOpts bf_opts;
  std::string bf_frames, bf_out_dir;
  CLI::App* bf = app.add_subcommand("beamform", "Beamform a frame container into a volume");
  add_common(bf, bf_opts);
  bf->add_option("--frames", bf_frames, "Input frame container (.vbf1)")->required();
  bf->add_option("--out-dir", bf_out_dir, "Output directory (overrides output.dir)");

  CommonOpts rec_opts;
  std::string rec_frames, rec_out_dir;
  CLI::App* rec = app.add_subcommand(
      "recover", "Recover beams from a low-rate coefficient-band container");
  add_common(rec, rec_opts);
  rec->add_option("--frames", rec_frames, "Input coefficient-band container (.vbf1)")->required();
  rec->add_option("--out-dir", rec_out_dir, "Output directory (overrides output.dir)");

  CommonOpts met_opts;
  std::string met_volume, met_reference, met_out_dir = ".";
  CLI::App* met = app.add_subcommand("metrics", "PSF and SNR metrics for a volume");
  add_common(met, met_opts);
  met->add_option("--volume", met_volume, "Volume container (.vbv1)")->required();
  met->add_option("--reference", met_reference, "Clean reference volume for SNR");
  met->add_option("--out-dir", met_out_dir, "Output directory for reports");

  CommonOpts run_opts;
  std::string run_out_dir;
  CLI::App* run = app.add_subcommand("run", "Full pipeline: simulate, beamform, recover, report");
  add_common(run, run_opts);
  run->add_option("--out-dir", run_out_dir, "Output directory (overrides output.dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (lut_build->parsed()) return do_lut_build(lut_opts, lut_out, lut_verify);
    if (sim->parsed()) return do_simulate(sim_opts, sim_out, sim_low_rate);
    if (bf->parsed()) return do_beamform(bf_opts, bf_frames, bf_out_dir);
    if (rec->parsed()) return do_recover(rec_opts, rec_frames, rec_out_dir);
    if (met->parsed()) return do_metrics(met_opts, met_volume, met_reference, met_out_dir);
    if (run->parsed()) return do_run(run_opts, run_out_dir);
  } catch (const vbeam::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const vbeam::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
