#pragma once

#include <fstream>
#include <map>
#include <sstream>

#include "vbeam/acquisition.hpp"
#include "vbeam/geometry.hpp"
#include "vbeam/phantom.hpp"
#include "vbeam/pulse.hpp"
#include "vbeam/recovery.hpp"
#include "vbeam/time_beamformer.hpp"

namespace vbeam {

using IniMap = std::map<std::string, std::map<std::string, std::string>>;

namespace config_detail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double to_double(const std::string& section, const std::string& key,
                        const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("[" + section + "] " + key + ": not a number: '" + value + "'");
  }
}

inline long to_long(const std::string& section, const std::string& key,
                    const std::string& value) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("[" + section + "] " + key + ": not an integer: '" + value + "'");
  }
}

inline bool to_bool(const std::string& section, const std::string& key,
                    const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ConfigError("[" + section + "] " + key + ": not a boolean: '" + value + "'");
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

}  // namespace config_detail

/// Sectioned key-value text: `[section]` headers, `key = value` lines,
/// comments starting with '#' or ';'.
inline IniMap parse_ini(std::istream& is) {
  using config_detail::trim;
  IniMap out;
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::size_t comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      out[section];
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    out[section][key] = value;
  }
  return out;
}

inline IniMap parse_ini_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  return parse_ini(is);
}

/// Applies a `section.key=value` command-line override.
inline void apply_override(IniMap& ini, const std::string& spec) {
  const std::size_t eq = spec.find('=');
  if (eq == std::string::npos) throw ConfigError("override must be section.key=value: " + spec);
  const std::string path = config_detail::trim(spec.substr(0, eq));
  const std::string value = config_detail::trim(spec.substr(eq + 1));
  const std::size_t dot = path.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 >= path.size())
    throw ConfigError("override must be section.key=value: " + spec);
  ini[path.substr(0, dot)][path.substr(dot + 1)] = value;
}

struct ReflectorSpec {
  double depth_mm = 0.0;
  double theta_x_deg = 0.0;
  double theta_y_deg = 0.0;
  double amplitude = 1.0;
};

/// Resolved run configuration. Every default equals the reference simulation
/// scenario (32x32 grid at 140 um pitch, 21x21 raster over +-7.15 degrees,
/// 3 MHz pulse sampled at 18.25 MHz for 1304 samples, three unit reflectors
/// on the theta_y = 0 plane), so an empty config reproduces it.
struct RunConfig {
  // geometry
  int rows = 32, cols = 32;
  double pitch = 140e-6;
  double speed_of_sound = 1540.0;
  std::string active_mode = "full";  // full | diagonal

  // pulse / sampling
  double f0 = 3e6;
  double bandwidth = 1.4e6;
  double fs = 18.25e6;
  int samples = 1304;

  // scan raster
  int nx = 21, ny = 21;
  double span_deg = 7.15;

  // phantom
  std::vector<ReflectorSpec> reflectors = {
      {26.0, -7.5, 0.0, 1.0}, {31.5, 0.0, 0.0, 1.0}, {37.0, 7.5, 0.0, 1.0}};
  double focus_mm = 31.5;

  // method
  std::string method = "fdbf";       // time | fdbf
  std::string kappa = "full";        // full | half | third | integer count
  std::string recover = "auto";      // auto | l1 | inverse
  std::string resynthesis = "band";  // band | full
  std::string interpolation = "linear";  // linear | sinc (time-domain paths)
  double cutoff_db = -24.0;
  int l_neg = 10, l_pos = 10;
  std::string nu_convention = "formula";  // formula | inclusive
  std::string lut_path;                   // optional prebuilt distortion table

  // solver
  SolverParams solver;
  double epsilon_scale = 1.5;
  double epsilon_noiseless_rel = 1e-6;

  // noise
  double noise_std = 0.0;
  double noise_std_rel = 0.0;  // relative to the peak clean record amplitude
  std::uint64_t seed = 1;

  // execution / output
  int workers = 0;  // 0 = hardware concurrency
  std::string out_dir = "out";
  bool write_volume_file = true;
  bool write_images = true;
  bool write_report = true;
  bool write_csv = true;
  double range_db = 40.0;
  int image_width = 400;
  int image_height = 600;

  ArrayGeometry build_geometry() const {
    ArrayGeometry g;
    g.rows = rows;
    g.cols = cols;
    g.pitch_x = pitch;
    g.pitch_y = pitch;
    g.speed_of_sound = speed_of_sound;
    g.z_offsets.assign(static_cast<std::size_t>(rows) * cols, 0.0);
    if (active_mode == "full")
      g.active = full_active_set(rows, cols);
    else if (active_mode == "diagonal")
      g.active = diagonal_subset(rows, cols);
    else
      throw ConfigError("geometry.active must be 'full' or 'diagonal': " + active_mode);
    g.validate();
    return g;
  }

  Pulse build_pulse() const { return make_pulse(f0, bandwidth, fs); }

  double duration() const { return samples / fs; }

  std::vector<double> axis_angles(int count) const {
    std::vector<double> out(static_cast<std::size_t>(count));
    if (count == 1) {
      out[0] = 0.0;
      return out;
    }
    const double span = deg2rad(span_deg);
    for (int i = 0; i < count; ++i)
      out[static_cast<std::size_t>(i)] = -span + 2.0 * span * i / (count - 1);
    return out;
  }

  /// Scan raster in row-major (theta_x outer, theta_y inner) order.
  std::vector<SteeringAngle> scan_angles() const {
    const std::vector<double> ax = axis_angles(nx);
    const std::vector<double> ay = axis_angles(ny);
    std::vector<SteeringAngle> out;
    out.reserve(ax.size() * ay.size());
    for (double x : ax)
      for (double y : ay) out.push_back({x, y});
    return out;
  }

  Phantom build_phantom() const {
    Phantom ph;
    for (const ReflectorSpec& r : reflectors) {
      Reflector ref;
      ref.t_l = 2.0 * (r.depth_mm * 1e-3) / speed_of_sound;
      ref.theta_x = deg2rad(r.theta_x_deg);
      ref.theta_y = deg2rad(r.theta_y_deg);
      ref.amplitude = r.amplitude;
      ph.reflectors.push_back(ref);
    }
    return ph;
  }

  Interpolation interp() const {
    if (interpolation == "linear") return Interpolation::kLinear;
    if (interpolation == "sinc") return Interpolation::kSinc;
    throw ConfigError("method.interpolation must be 'linear' or 'sinc': " + interpolation);
  }

  NuConvention nu_conv() const {
    if (nu_convention == "formula") return NuConvention::kFormula;
    if (nu_convention == "inclusive") return NuConvention::kInclusive;
    throw ConfigError("method.nu_convention must be 'formula' or 'inclusive': " + nu_convention);
  }

  /// Fully resolved key-value echo (defaults included) for run reports.
  IniMap echo() const;
};

namespace config_detail {

inline std::vector<ReflectorSpec> parse_reflectors(const std::string& value) {
  std::vector<ReflectorSpec> out;
  for (const std::string& item : split(value, ',')) {
    if (item.empty()) continue;
    const std::vector<std::string> parts = split(item, ':');
    if (parts.size() < 2 || parts.size() > 4)
      throw ConfigError("reflector spec must be depth_mm:theta_x_deg[:theta_y_deg[:amplitude]]: " +
                        item);
    ReflectorSpec r;
    r.depth_mm = to_double("phantom", "reflectors", parts[0]);
    r.theta_x_deg = to_double("phantom", "reflectors", parts[1]);
    if (parts.size() > 2) r.theta_y_deg = to_double("phantom", "reflectors", parts[2]);
    if (parts.size() > 3) r.amplitude = to_double("phantom", "reflectors", parts[3]);
    out.push_back(r);
  }
  if (out.empty()) throw ConfigError("phantom.reflectors: empty list");
  return out;
}

inline std::string format_reflectors(const std::vector<ReflectorSpec>& rs) {
  std::ostringstream os;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    if (i) os << ", ";
    os << rs[i].depth_mm << ":" << rs[i].theta_x_deg << ":" << rs[i].theta_y_deg << ":"
       << rs[i].amplitude;
  }
  return os.str();
}

}  // namespace config_detail

inline RunConfig load_config(const IniMap& ini) {
  using namespace config_detail;
  RunConfig c;
  for (const auto& [section, entries] : ini) {
    for (const auto& [key, value] : entries) {
      const std::string where = section + "." + key;
      if (section == "geometry") {
        if (key == "rows") c.rows = static_cast<int>(to_long(section, key, value));
        else if (key == "cols") c.cols = static_cast<int>(to_long(section, key, value));
        else if (key == "pitch") c.pitch = to_double(section, key, value);
        else if (key == "speed_of_sound") c.speed_of_sound = to_double(section, key, value);
        else if (key == "active") c.active_mode = value;
        else throw ConfigError("unknown config key: " + where);
      } else if (section == "pulse") {
        if (key == "f0") c.f0 = to_double(section, key, value);
        else if (key == "bandwidth") c.bandwidth = to_double(section, key, value);
        else if (key == "fs") c.fs = to_double(section, key, value);
        else if (key == "samples") c.samples = static_cast<int>(to_long(section, key, value));
        else throw ConfigError("unknown config key: " + where);
      } else if (section == "scan") {
        if (key == "nx") c.nx = static_cast<int>(to_long(section, key, value));
        else if (key == "ny") c.ny = static_cast<int>(to_long(section, key, value));
        else if (key == "span_deg") c.span_deg = to_double(section, key, value);
        else throw ConfigError("unknown config key: " + where);
      } else if (section == "phantom") {
        if (key == "reflectors") c.reflectors = parse_reflectors(value);
        else if (key == "focus_mm") c.focus_mm = to_double(section, key, value);
        else throw ConfigError("unknown config key: " + where);
      } else if (section == "method") {
        if (key == "method") c.method = value;
        else if (key == "kappa") c.kappa = value;
        else if (key == "recover") c.recover = value;
        else if (key == "resynthesis") c.resynthesis = value;
        else if (key == "interpolation") c.interpolation = value;
        else if (key == "cutoff_db") c.cutoff_db = to_double(section, key, value);
        else if (key == "l_neg") c.l_neg = static_cast<int>(to_long(section, key, value));
        else if (key == "l_pos") c.l_pos = static_cast<int>(to_long(section, key, value));
        else if (key == "nu_convention") c.nu_convention = value;
        else if (key == "lut_path") c.lut_path = value;
        else throw ConfigError("unknown config key: " + where);
      } else if (section == "solver") {
        if (key == "stages") c.solver.stages = static_cast<int>(to_long(section, key, value));
        else if (key == "max_iters") c.solver.max_iters = static_cast<int>(to_long(section, key, value));
        else if (key == "tol") c.solver.tol = to_double(section, key, value);
        else if (key == "window") c.solver.window = static_cast<int>(to_long(section, key, value));
        else if (key == "mu_hi_rel") c.solver.mu_hi_rel = to_double(section, key, value);
        else if (key == "mu_lo_rel") c.solver.mu_lo_rel = to_double(section, key, value);
        else if (key == "epsilon_scale") c.epsilon_scale = to_double(section, key, value);
        else if (key == "epsilon_noiseless_rel") c.epsilon_noiseless_rel = to_double(section, key, value);
        else throw ConfigError("unknown config key: " + where);
      } else if (section == "noise") {
        if (key == "std") c.noise_std = to_double(section, key, value);
        else if (key == "std_rel") c.noise_std_rel = to_double(section, key, value);
        else if (key == "seed") c.seed = static_cast<std::uint64_t>(to_long(section, key, value));
        else throw ConfigError("unknown config key: " + where);
      } else if (section == "run") {
        if (key == "workers") c.workers = static_cast<int>(to_long(section, key, value));
        else throw ConfigError("unknown config key: " + where);
      } else if (section == "output") {
        if (key == "dir") c.out_dir = value;
        else if (key == "volume") c.write_volume_file = to_bool(section, key, value);
        else if (key == "images") c.write_images = to_bool(section, key, value);
        else if (key == "report") c.write_report = to_bool(section, key, value);
        else if (key == "csv") c.write_csv = to_bool(section, key, value);
        else if (key == "range_db") c.range_db = to_double(section, key, value);
        else if (key == "image_width") c.image_width = static_cast<int>(to_long(section, key, value));
        else if (key == "image_height") c.image_height = static_cast<int>(to_long(section, key, value));
        else throw ConfigError("unknown config key: " + where);
      } else {
        throw ConfigError("unknown config section: [" + section + "]");
      }
    }
  }

  if (c.rows < 1 || c.cols < 1) throw ConfigError("geometry.rows/cols must be positive");
  if (!(c.pitch > 0.0)) throw ConfigError("geometry.pitch must be positive");
  if (!(c.speed_of_sound > 0.0)) throw ConfigError("geometry.speed_of_sound must be positive");
  if (c.samples < 4) throw ConfigError("pulse.samples must be at least 4");
  if (c.nx < 1 || c.ny < 1) throw ConfigError("scan.nx/ny must be positive");
  if (!(c.span_deg >= 0.0 && c.span_deg < 90.0)) throw ConfigError("scan.span_deg out of range");
  if (c.method != "time" && c.method != "fdbf")
    throw ConfigError("method.method must be 'time' or 'fdbf': " + c.method);
  if (c.recover != "auto" && c.recover != "l1" && c.recover != "inverse")
    throw ConfigError("method.recover must be auto, l1, or inverse: " + c.recover);
  if (c.resynthesis != "band" && c.resynthesis != "full")
    throw ConfigError("method.resynthesis must be 'band' or 'full': " + c.resynthesis);
  if (c.l_neg < 0 || c.l_pos < 0) throw ConfigError("method.l_neg/l_pos must be >= 0");
  if (!(c.cutoff_db < 0.0)) throw ConfigError("method.cutoff_db must be negative");
  if (c.noise_std < 0.0 || c.noise_std_rel < 0.0) throw ConfigError("noise std must be >= 0");
  if (c.noise_std > 0.0 && c.noise_std_rel > 0.0)
    throw ConfigError("set noise.std or noise.std_rel, not both");
  if (c.workers < 0) throw ConfigError("run.workers must be >= 0");
  if (!(c.range_db > 0.0)) throw ConfigError("output.range_db must be positive");
  c.interp();     // validate enums eagerly
  c.nu_conv();
  if (c.kappa != "full" && c.kappa != "half" && c.kappa != "third")
    (void)config_detail::to_long("method", "kappa", c.kappa);
  return c;
}

inline IniMap RunConfig::echo() const {
  using config_detail::format_reflectors;
  IniMap m;
  auto put = [&m](const std::string& s, const std::string& k, const std::string& v) {
    m[s][k] = v;
  };
  auto num = [](double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  };
  put("geometry", "rows", std::to_string(rows));
  put("geometry", "cols", std::to_string(cols));
  put("geometry", "pitch", num(pitch));
  put("geometry", "speed_of_sound", num(speed_of_sound));
  put("geometry", "active", active_mode);
  put("pulse", "f0", num(f0));
  put("pulse", "bandwidth", num(bandwidth));
  put("pulse", "fs", num(fs));
  put("pulse", "samples", std::to_string(samples));
  put("scan", "nx", std::to_string(nx));
  put("scan", "ny", std::to_string(ny));
  put("scan", "span_deg", num(span_deg));
  put("phantom", "reflectors", format_reflectors(reflectors));
  put("phantom", "focus_mm", num(focus_mm));
  put("method", "method", method);
  put("method", "kappa", kappa);
  put("method", "recover", recover);
  put("method", "resynthesis", resynthesis);
  put("method", "interpolation", interpolation);
  put("method", "cutoff_db", num(cutoff_db));
  put("method", "l_neg", std::to_string(l_neg));
  put("method", "l_pos", std::to_string(l_pos));
  put("method", "nu_convention", nu_convention);
  put("method", "lut_path", lut_path);
  put("solver", "stages", std::to_string(solver.stages));
  put("solver", "max_iters", std::to_string(solver.max_iters));
  put("solver", "tol", num(solver.tol));
  put("solver", "window", std::to_string(solver.window));
  put("solver", "mu_hi_rel", num(solver.mu_hi_rel));
  put("solver", "mu_lo_rel", num(solver.mu_lo_rel));
  put("solver", "epsilon_scale", num(epsilon_scale));
  put("solver", "epsilon_noiseless_rel", num(epsilon_noiseless_rel));
  put("noise", "std", num(noise_std));
  put("noise", "std_rel", num(noise_std_rel));
  put("noise", "seed", std::to_string(seed));
  put("run", "workers", std::to_string(workers));
  put("output", "dir", out_dir);
  put("output", "volume", write_volume_file ? "true" : "false");
  put("output", "images", write_images ? "true" : "false");
  put("output", "report", write_report ? "true" : "false");
  put("output", "csv", write_csv ? "true" : "false");
  put("output", "range_db", num(range_db));
  put("output", "image_width", std::to_string(image_width));
  put("output", "image_height", std::to_string(image_height));
  return m;
}

}  // namespace vbeam
