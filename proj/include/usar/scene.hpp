#pragma once

#include "usar/geometry.hpp"
#include "usar/types.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace usar {

// Real reflectivity on the pixel grid, row-major, values in [0, 1].
struct Scene {
  RVector reflectivity;
  GridShape grid;

  void validate() const;  // bounds and size checks
};

struct Measurement {
  CVector data;
  double snr_db = std::numeric_limits<double>::infinity();  // +inf = noiseless
  std::uint64_t seed = 0;
};

// Measurements only; scenes are kept for diagnostics and never enter training.
struct TrainingSet {
  std::vector<Measurement> measurements;
  std::vector<Scene> scenes;  // may be empty

  std::size_t size() const { return measurements.size(); }
};

struct RectSpec {
  int row = 0;  // top-left, 0-indexed
  int col = 0;
  int height = 1;
  int width = 1;
};

// One random axis-aligned rectangle of ones on a zero background. Width and
// height are uniform in [1, 6]; placement keeps the whole rectangle inside a
// border margin of round(3 rows / 31) pixels (1-indexed rows [m, rows - m]),
// i.e. [3, 28] on the 31x31 grid. Throws if no rectangle fits.
Scene gen_training_scene(GridShape grid, std::uint64_t seed);

// d = F rho, noiseless.
Measurement synthesize(const ForwardModel& model, const Scene& scene);

// Adds circular complex Gaussian noise with per-element variance
// sigma^2 = (|d|^2 / N) / 10^(snr_db / 10); real and imaginary parts each get
// variance sigma^2 / 2. snr_db = +inf returns the input unchanged. Throws for
// a zero measurement at finite SNR.
Measurement add_noise(const Measurement& d, double snr_db, std::uint64_t seed);

// Binary scene with the listed rectangles set to 1. Rectangles must lie
// inside the grid.
Scene gen_phantom(GridShape grid, const std::vector<RectSpec>& rects);

}  // namespace usar
