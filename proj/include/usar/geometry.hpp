#pragma once

#include "usar/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace usar {

// Bistatic collection geometry: a moving receiver sampled at S slow-time
// positions, an optional stationary transmitter, W temporal frequencies and a
// flat scene grid centred on the origin.
struct ImagingGeometry {
  double scene_extent_m = 0.0;            // side length, origin at scene centre
  GridShape grid;
  std::vector<Vec3> receiver_path;        // one position per slow-time sample
  std::optional<Vec3> transmitter;
  std::vector<double> frequencies;        // angular, rad/s
  double c0 = 299792458.0;

  int slow_time_count() const { return static_cast<int>(receiver_path.size()); }
  int frequency_count() const { return static_cast<int>(frequencies.size()); }
  int measurement_count() const { return slow_time_count() * frequency_count(); }
  int pixel_count() const { return grid.pixel_count(); }

  // Pixel (r, c) -> physical centre ((c - (cols-1)/2) d, ((rows-1)/2 - r) d, 0)
  // with d = extent / cols. Fixed convention; pixels are row-major flattened.
  Vec3 pixel_position(int row, int col) const;
  Vec3 pixel_position(int flat_index) const;

  double pixel_pitch() const { return scene_extent_m / grid.cols; }

  // Throws UsarError if any invariant fails (counts >= 1, positive
  // frequencies, finite positions).
  void validate() const;
};

// Uniform circular receiver trajectory [radius cos s, radius sin s, height]
// over s in [aperture_start, aperture_end) and frequencies uniform over
// 2*pi*[fc - bw/2, fc + bw/2].
ImagingGeometry make_circular_geometry(double scene_extent_m, GridShape grid,
                                       double radius_m, double height_m,
                                       int slow_time_samples, int frequency_samples,
                                       double center_frequency_hz, double bandwidth_hz,
                                       std::optional<Vec3> transmitter,
                                       double aperture_start_rad = 0.0,
                                       double aperture_end_rad = 2.0 * M_PI);

// Discretized measurement operator. Rows are (slow-time, frequency) pairs,
// slow-time major: all W frequencies of s_1, then s_2, ... Columns are
// row-major flattened pixels. Every entry has modulus kappa; this holds on
// construction and is restored by projection after every gradient update.
struct ForwardModel {
  CMatrix entries;
  double kappa = 1.0;

  Eigen::Index measurement_count() const { return entries.rows(); }
  Eigen::Index pixel_count() const { return entries.cols(); }

  // Largest deviation of any entry modulus from kappa.
  double max_modulus_error() const;
};

// Transmitter-to-pixel plus pixel-to-receiver path length at one slow-time
// sample. Throws UsarError when the geometry has no transmitter.
double bistatic_range(const ImagingGeometry& geometry, int s_index, int pixel_index);

// Exact model: entry ((s_j, w_i), m) = kappa * exp(-i (w_i / c0) R(s_j, x_m)).
// Requires a transmitter.
ForwardModel build_forward_model(const ImagingGeometry& geometry, double kappa = 1.0);

// Phase offset standing in for the unknown transmitter range term,
// (s_index, pixel_index) -> metres.
using PhaseOffsetFn = std::function<double(int, int)>;

// Partially known model: the range term is |gamma_R(s) - x| + phi_T(s, x).
// The default phi_T == 0 is the no-knowledge initialization; passing the true
// transmitter range reproduces build_forward_model exactly.
ForwardModel init_unknown_model(const ImagingGeometry& geometry,
                                const PhaseOffsetFn& phi_T = nullptr,
                                double kappa = 1.0);

// Power-iteration estimate of the largest eigenvalue of F^H F, i.e. the
// squared spectral norm. Monotone nondecreasing in the iteration count;
// returns 0 for the zero matrix.
double spectral_norm_sq(const ForwardModel& model, int iterations, std::uint64_t seed);

}  // namespace usar
