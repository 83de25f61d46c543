#pragma once

#include "usar/geometry.hpp"
#include "usar/scene.hpp"
#include "usar/training.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace usar {

// Experiment description parsed from a flat key = value file ('#' comments,
// blank lines ignored). Unknown keys and malformed lines are rejected with
// the line number in the message.
struct ExperimentConfig {
  // scene / geometry: defaults reproduce the reference airborne experiment.
  double scene_extent_m = 620.0;
  int grid_rows = 31;
  int grid_cols = 31;
  double orbit_radius_m = 7000.0;
  double orbit_height_m = 6500.0;
  int slow_time_count = 400;
  int frequency_count = 100;
  double center_frequency_hz = 760e6;  // UHF broadcast band
  double bandwidth_hz = 8e6;
  std::optional<Vec3> transmitter = Vec3(11200.0, 11200.0, 6500.0);
  bool assume_transmitter_unknown = true;  // synthesis uses the position,
                                           // training initialization does not
  double kappa = 1.0;

  // data
  double snr_db = 50.0;
  int training_samples = 25;
  std::uint64_t seed = 1;

  // encoder / training
  std::string penalty = "l1";  // "l1" | "l0"
  int layers = 16;
  int epochs = 7;
  double lambda = 30.0;
  double c = 1e-5;
  double eta_Q = 1e-9;
  double eta_F = 1e-5;
  double eta_tau = 1e-14;
  std::optional<double> alpha = 1e-6;  // empty ("auto"): 1 / sigma_max^2(F0)

  // baselines
  int baseline_iterations = 100;

  // evaluation
  int eval_realizations = 20;
  std::vector<RectSpec> phantom_rects;  // empty: centered 4x4 rectangle
  std::string phantom_file;             // overrides phantom_rects when set

  Penalty penalty_kind() const;
  void validate() const;
};

// The evaluation phantom for a config: the scene file when given, the listed
// rectangles otherwise, a centered 4x4 rectangle by default.
Scene phantom_from_config(const ExperimentConfig& cfg);

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Canonical "key = value" serialization (sorted keys) used for hashing and
// for echoing the effective config back to the user.
std::string canonical_config(const ExperimentConfig& cfg);

// Builders shared by CLI and tests.
ImagingGeometry geometry_from_config(const ExperimentConfig& cfg);
TrainConfig train_config_from(const ExperimentConfig& cfg);

}  // namespace usar
