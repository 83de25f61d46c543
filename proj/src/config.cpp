#include "usar/config.hpp"

#include "usar/io.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace usar {

Penalty ExperimentConfig::penalty_kind() const {
  if (penalty == "l1") return Penalty::L1;
  if (penalty == "l0") return Penalty::L0;
  throw UsarError("config: penalty must be 'l1' or 'l0', got '" + penalty + "'");
}

void ExperimentConfig::validate() const {
  penalty_kind();
  if (grid_rows < 1 || grid_cols < 1) throw UsarError("config: grid must be at least 1x1");
  if (!(scene_extent_m > 0.0)) throw UsarError("config: scene_extent_m must be positive");
  if (slow_time_count < 1) throw UsarError("config: slow_time_count must be >= 1");
  if (frequency_count < 1) throw UsarError("config: frequency_count must be >= 1");
  if (!(center_frequency_hz > 0.0))
    throw UsarError("config: center_frequency_hz must be positive");
  if (bandwidth_hz < 0.0) throw UsarError("config: bandwidth_hz must be nonnegative");
  if (!(kappa > 0.0)) throw UsarError("config: kappa must be positive");
  if (training_samples < 1) throw UsarError("config: training_samples must be >= 1");
  if (layers < 1) throw UsarError("config: layers must be >= 1");
  if (epochs < 1) throw UsarError("config: epochs must be >= 1");
  if (!(lambda >= 0.0)) throw UsarError("config: lambda must be nonnegative");
  if (!(c >= 0.0 && c < 1.0)) throw UsarError("config: c must lie in [0, 1)");
  if (!(eta_Q >= 0.0) || !(eta_F >= 0.0) || !(eta_tau >= 0.0))
    throw UsarError("config: learning rates must be nonnegative");
  if (alpha && !(*alpha > 0.0)) throw UsarError("config: alpha must be positive");
  if (baseline_iterations < 1) throw UsarError("config: baseline_iterations must be >= 1");
  if (eval_realizations < 1) throw UsarError("config: eval_realizations must be >= 1");
  if (!assume_transmitter_unknown && !transmitter)
    throw UsarError(
        "config: transmitter is 'unknown' but assume_transmitter_unknown is false; "
        "data synthesis needs a transmitter position");
}

namespace {

[[noreturn]] void line_error(int line, const std::string& msg) {
  throw UsarError("config line " + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v, int line) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) line_error(line, "bad number '" + v + "'");
    return x;
  } catch (const UsarError&) {
    throw;
  } catch (const std::exception&) {
    line_error(line, "bad number '" + v + "'");
  }
}

long parse_long(const std::string& v, int line) {
  try {
    std::size_t used = 0;
    const long x = std::stol(v, &used);
    if (used != v.size()) line_error(line, "bad integer '" + v + "'");
    return x;
  } catch (const UsarError&) {
    throw;
  } catch (const std::exception&) {
    line_error(line, "bad integer '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string& v, int line) {
  try {
    std::size_t used = 0;
    const unsigned long long x = std::stoull(v, &used);
    if (used != v.size() || v[0] == '-') line_error(line, "bad unsigned integer '" + v + "'");
    return x;
  } catch (const UsarError&) {
    throw;
  } catch (const std::exception&) {
    line_error(line, "bad unsigned integer '" + v + "'");
  }
}

bool parse_bool(const std::string& v, int line) {
  if (v == "true") return true;
  if (v == "false") return false;
  line_error(line, "expected 'true' or 'false', got '" + v + "'");
}

std::vector<RectSpec> parse_rects(const std::string& v, int line) {
  // "row col height width" groups separated by ';'
  std::vector<RectSpec> rects;
  std::istringstream groups(v);
  std::string group;
  while (std::getline(groups, group, ';')) {
    group = trim(group);
    if (group.empty()) continue;
    std::istringstream s(group);
    RectSpec r;
    if (!(s >> r.row >> r.col >> r.height >> r.width))
      line_error(line, "rectangle needs 'row col height width', got '" + group + "'");
    std::string extra;
    if (s >> extra) line_error(line, "trailing text in rectangle '" + group + "'");
    rects.push_back(r);
  }
  if (rects.empty()) line_error(line, "empty rectangle list");
  return rects;
}

std::string format_double(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream lines(text);
  std::string raw;
  int line = 0;
  std::map<std::string, int> seen;
  while (std::getline(lines, raw)) {
    ++line;
    const auto comment = raw.find('#');
    const std::string body = trim(comment == std::string::npos ? raw : raw.substr(0, comment));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) line_error(line, "expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty()) line_error(line, "missing key");
    if (value.empty()) line_error(line, "missing value for '" + key + "'");
    if (auto it = seen.find(key); it != seen.end())
      line_error(line, "duplicate key '" + key + "' (first on line " +
                           std::to_string(it->second) + ")");
    seen[key] = line;

    if (key == "scene_extent_m") {
      cfg.scene_extent_m = parse_double(value, line);
    } else if (key == "grid_rows") {
      cfg.grid_rows = static_cast<int>(parse_long(value, line));
    } else if (key == "grid_cols") {
      cfg.grid_cols = static_cast<int>(parse_long(value, line));
    } else if (key == "orbit_radius_m") {
      cfg.orbit_radius_m = parse_double(value, line);
    } else if (key == "orbit_height_m") {
      cfg.orbit_height_m = parse_double(value, line);
    } else if (key == "slow_time_count") {
      cfg.slow_time_count = static_cast<int>(parse_long(value, line));
    } else if (key == "frequency_count") {
      cfg.frequency_count = static_cast<int>(parse_long(value, line));
    } else if (key == "center_frequency_hz") {
      cfg.center_frequency_hz = parse_double(value, line);
    } else if (key == "bandwidth_hz") {
      cfg.bandwidth_hz = parse_double(value, line);
    } else if (key == "transmitter") {
      if (value == "unknown") {
        cfg.transmitter.reset();
        cfg.assume_transmitter_unknown = true;
      } else {
        std::istringstream s(value);
        Vec3 t;
        std::string extra;
        if (!(s >> t.x() >> t.y() >> t.z()) || (s >> extra))
          line_error(line, "transmitter needs 'x y z' or 'unknown', got '" + value + "'");
        cfg.transmitter = t;
      }
    } else if (key == "assume_transmitter_unknown") {
      cfg.assume_transmitter_unknown = parse_bool(value, line);
    } else if (key == "kappa") {
      cfg.kappa = parse_double(value, line);
    } else if (key == "snr_db") {
      cfg.snr_db = parse_double(value, line);
    } else if (key == "training_samples") {
      cfg.training_samples = static_cast<int>(parse_long(value, line));
    } else if (key == "seed") {
      cfg.seed = parse_u64(value, line);
    } else if (key == "penalty") {
      cfg.penalty = value;
    } else if (key == "layers") {
      cfg.layers = static_cast<int>(parse_long(value, line));
    } else if (key == "epochs") {
      cfg.epochs = static_cast<int>(parse_long(value, line));
    } else if (key == "lambda") {
      cfg.lambda = parse_double(value, line);
    } else if (key == "c") {
      cfg.c = parse_double(value, line);
    } else if (key == "eta_Q") {
      cfg.eta_Q = parse_double(value, line);
    } else if (key == "eta_F") {
      cfg.eta_F = parse_double(value, line);
    } else if (key == "eta_tau") {
      cfg.eta_tau = parse_double(value, line);
    } else if (key == "alpha") {
      if (value == "auto") {
        cfg.alpha.reset();
      } else {
        cfg.alpha = parse_double(value, line);
      }
    } else if (key == "baseline_iterations") {
      cfg.baseline_iterations = static_cast<int>(parse_long(value, line));
    } else if (key == "eval_realizations") {
      cfg.eval_realizations = static_cast<int>(parse_long(value, line));
    } else if (key == "phantom") {
      cfg.phantom_rects = parse_rects(value, line);
    } else if (key == "phantom_file") {
      cfg.phantom_file = value;
    } else {
      line_error(line, "unknown key '" + key + "'");
    }
  }
  try {
    cfg.validate();
  } catch (const UsarError& e) {
    throw UsarError(std::string(e.what()) + " (while validating the loaded config)");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  try {
    return parse_config(io::read_file(path));
  } catch (const UsarError& e) {
    throw UsarError(path + ": " + e.what());
  }
}

std::string canonical_config(const ExperimentConfig& cfg) {
  std::map<std::string, std::string> kv;
  kv["scene_extent_m"] = format_double(cfg.scene_extent_m);
  kv["grid_rows"] = std::to_string(cfg.grid_rows);
  kv["grid_cols"] = std::to_string(cfg.grid_cols);
  kv["orbit_radius_m"] = format_double(cfg.orbit_radius_m);
  kv["orbit_height_m"] = format_double(cfg.orbit_height_m);
  kv["slow_time_count"] = std::to_string(cfg.slow_time_count);
  kv["frequency_count"] = std::to_string(cfg.frequency_count);
  kv["center_frequency_hz"] = format_double(cfg.center_frequency_hz);
  kv["bandwidth_hz"] = format_double(cfg.bandwidth_hz);
  if (cfg.transmitter) {
    kv["transmitter"] = format_double(cfg.transmitter->x()) + " " +
                        format_double(cfg.transmitter->y()) + " " +
                        format_double(cfg.transmitter->z());
  } else {
    kv["transmitter"] = "unknown";
  }
  kv["assume_transmitter_unknown"] = cfg.assume_transmitter_unknown ? "true" : "false";
  kv["kappa"] = format_double(cfg.kappa);
  kv["snr_db"] = format_double(cfg.snr_db);
  kv["training_samples"] = std::to_string(cfg.training_samples);
  kv["seed"] = std::to_string(cfg.seed);
  kv["penalty"] = cfg.penalty;
  kv["layers"] = std::to_string(cfg.layers);
  kv["epochs"] = std::to_string(cfg.epochs);
  kv["lambda"] = format_double(cfg.lambda);
  kv["c"] = format_double(cfg.c);
  kv["eta_Q"] = format_double(cfg.eta_Q);
  kv["eta_F"] = format_double(cfg.eta_F);
  kv["eta_tau"] = format_double(cfg.eta_tau);
  kv["alpha"] = cfg.alpha ? format_double(*cfg.alpha) : "auto";
  kv["baseline_iterations"] = std::to_string(cfg.baseline_iterations);
  kv["eval_realizations"] = std::to_string(cfg.eval_realizations);
  if (!cfg.phantom_rects.empty()) {
    std::string spec;
    for (const RectSpec& r : cfg.phantom_rects) {
      if (!spec.empty()) spec += "; ";
      spec += std::to_string(r.row) + " " + std::to_string(r.col) + " " +
              std::to_string(r.height) + " " + std::to_string(r.width);
    }
    kv["phantom"] = spec;
  }
  if (!cfg.phantom_file.empty()) kv["phantom_file"] = cfg.phantom_file;

  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

Scene phantom_from_config(const ExperimentConfig& cfg) {
  if (!cfg.phantom_file.empty()) {
    Scene scene = io::read_scene(cfg.phantom_file);
    if (scene.grid.rows != cfg.grid_rows || scene.grid.cols != cfg.grid_cols)
      throw UsarError("phantom scene file grid does not match the configured grid");
    return scene;
  }
  const GridShape grid{cfg.grid_rows, cfg.grid_cols};
  if (!cfg.phantom_rects.empty()) return gen_phantom(grid, cfg.phantom_rects);
  const int h = std::min(4, cfg.grid_rows);
  const int w = std::min(4, cfg.grid_cols);
  const int row = static_cast<int>(std::lround((cfg.grid_rows - h) / 2.0));
  const int col = static_cast<int>(std::lround((cfg.grid_cols - w) / 2.0));
  return gen_phantom(grid, {RectSpec{row, col, h, w}});
}

ImagingGeometry geometry_from_config(const ExperimentConfig& cfg) {
  return make_circular_geometry(cfg.scene_extent_m, GridShape{cfg.grid_rows, cfg.grid_cols},
                                cfg.orbit_radius_m, cfg.orbit_height_m, cfg.slow_time_count,
                                cfg.frequency_count, cfg.center_frequency_hz,
                                cfg.bandwidth_hz, cfg.transmitter);
}

TrainConfig train_config_from(const ExperimentConfig& cfg) {
  TrainConfig tc;
  tc.epochs = cfg.epochs;
  tc.eta_Q = cfg.eta_Q;
  tc.eta_F = cfg.eta_F;
  tc.eta_tau = cfg.eta_tau;
  tc.lambda = cfg.lambda;
  return tc;
}

}  // namespace usar
