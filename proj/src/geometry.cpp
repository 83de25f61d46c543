#include "usar/geometry.hpp"

#include "usar/parallel.hpp"
#include "usar/rng.hpp"

#include <cmath>
#include <string>

namespace usar {

Vec3 ImagingGeometry::pixel_position(int row, int col) const {
  const double d = pixel_pitch();
  const double x = (col - (grid.cols - 1) / 2.0) * d;
  const double y = ((grid.rows - 1) / 2.0 - row) * d;
  return Vec3(x, y, 0.0);
}

Vec3 ImagingGeometry::pixel_position(int flat_index) const {
  return pixel_position(flat_index / grid.cols, flat_index % grid.cols);
}

void ImagingGeometry::validate() const {
  if (grid.rows < 1 || grid.cols < 1)
    throw UsarError("geometry: grid must be at least 1x1");
  if (scene_extent_m <= 0.0) throw UsarError("geometry: scene extent must be positive");
  if (receiver_path.empty()) throw UsarError("geometry: receiver path is empty");
  if (frequencies.empty()) throw UsarError("geometry: frequency list is empty");
  for (const Vec3& p : receiver_path)
    if (!p.allFinite()) throw UsarError("geometry: nonfinite receiver position");
  if (transmitter && !transmitter->allFinite())
    throw UsarError("geometry: nonfinite transmitter position");
  for (double w : frequencies)
    if (!(w > 0.0) || !std::isfinite(w))
      throw UsarError("geometry: frequencies must be positive and finite");
  if (!(c0 > 0.0)) throw UsarError("geometry: propagation speed must be positive");
}

ImagingGeometry make_circular_geometry(double scene_extent_m, GridShape grid,
                                       double radius_m, double height_m,
                                       int slow_time_samples, int frequency_samples,
                                       double center_frequency_hz, double bandwidth_hz,
                                       std::optional<Vec3> transmitter,
                                       double aperture_start_rad,
                                       double aperture_end_rad) {
  if (slow_time_samples < 1) throw UsarError("geometry: need at least one slow-time sample");
  if (frequency_samples < 1) throw UsarError("geometry: need at least one frequency");
  if (bandwidth_hz < 0.0) throw UsarError("geometry: bandwidth must be nonnegative");
  if (center_frequency_hz - bandwidth_hz / 2.0 <= 0.0)
    throw UsarError("geometry: band must stay above DC");

  ImagingGeometry g;
  g.scene_extent_m = scene_extent_m;
  g.grid = grid;
  g.transmitter = transmitter;

  g.receiver_path.reserve(slow_time_samples);
  const double span = aperture_end_rad - aperture_start_rad;
  for (int j = 0; j < slow_time_samples; ++j) {
    const double s = aperture_start_rad + span * j / slow_time_samples;
    g.receiver_path.emplace_back(radius_m * std::cos(s), radius_m * std::sin(s), height_m);
  }

  g.frequencies.reserve(frequency_samples);
  const double f_lo = center_frequency_hz - bandwidth_hz / 2.0;
  const double f_hi = center_frequency_hz + bandwidth_hz / 2.0;
  for (int i = 0; i < frequency_samples; ++i) {
    const double f = frequency_samples == 1
                         ? center_frequency_hz
                         : f_lo + (f_hi - f_lo) * i / (frequency_samples - 1);
    g.frequencies.push_back(2.0 * M_PI * f);
  }

  g.validate();
  return g;
}

double ForwardModel::max_modulus_error() const {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < entries.cols(); ++j)
    for (Eigen::Index i = 0; i < entries.rows(); ++i) {
      const double err = std::abs(std::abs(entries(i, j)) - kappa);
      if (err > worst) worst = err;
    }
  return worst;
}

double bistatic_range(const ImagingGeometry& geometry, int s_index, int pixel_index) {
  if (!geometry.transmitter)
    throw UsarError("bistatic_range: geometry has no transmitter");
  const Vec3 x = geometry.pixel_position(pixel_index);
  const Vec3& rx = geometry.receiver_path.at(static_cast<std::size_t>(s_index));
  return (*geometry.transmitter - x).norm() + (rx - x).norm();
}

namespace {

// Shared kernel: entry phase is -(w_i / c0) * range(s_j, x_m) with rows
// slow-time major ((s_j, w_i) -> j * W + i).
ForwardModel build_from_range(const ImagingGeometry& geometry, double kappa,
                              const std::function<double(int, int)>& range_fn) {
  geometry.validate();
  if (!(kappa > 0.0)) throw UsarError("forward model: kappa must be positive");
  const int S = geometry.slow_time_count();
  const int W = geometry.frequency_count();
  const int M = geometry.pixel_count();

  ForwardModel model;
  model.kappa = kappa;
  model.entries.resize(static_cast<Eigen::Index>(S) * W, M);

  parallel_for(static_cast<std::size_t>(M), [&](std::size_t m_idx) {
    const int m = static_cast<int>(m_idx);
    for (int j = 0; j < S; ++j) {
      const double range = range_fn(j, m);
      for (int i = 0; i < W; ++i) {
        const double phase = -(geometry.frequencies[i] / geometry.c0) * range;
        model.entries(static_cast<Eigen::Index>(j) * W + i, m) =
            Complex(kappa * std::cos(phase), kappa * std::sin(phase));
      }
    }
  });
  return model;
}

}  // namespace

ForwardModel build_forward_model(const ImagingGeometry& geometry, double kappa) {
  if (!geometry.transmitter)
    throw UsarError("build_forward_model: geometry has no transmitter");
  return build_from_range(geometry, kappa, [&](int j, int m) {
    return bistatic_range(geometry, j, m);
  });
}

ForwardModel init_unknown_model(const ImagingGeometry& geometry, const PhaseOffsetFn& phi_T,
                                double kappa) {
  return build_from_range(geometry, kappa, [&](int j, int m) {
    const Vec3 x = geometry.pixel_position(m);
    double range = (geometry.receiver_path[static_cast<std::size_t>(j)] - x).norm();
    if (phi_T) range += phi_T(j, m);
    return range;
  });
}

double spectral_norm_sq(const ForwardModel& model, int iterations, std::uint64_t seed) {
  const Eigen::Index M = model.pixel_count();
  if (M == 0 || model.measurement_count() == 0) return 0.0;
  if (iterations < 1) throw UsarError("spectral_norm_sq: need at least one iteration");

  std::mt19937_64 rng(derive_seed(seed, 0x9f07));
  CVector v(M);
  for (Eigen::Index i = 0; i < M; ++i) v(i) = Complex(gaussian(rng), gaussian(rng));
  double vnorm = v.norm();
  if (vnorm == 0.0) {
    v.setZero();
    v(0) = 1.0;
    vnorm = 1.0;
  }
  v /= vnorm;

  double eig = 0.0;
  for (int it = 0; it < iterations; ++it) {
    CVector w = model.entries.adjoint() * (model.entries * v);
    eig = std::real(v.dot(w));  // Rayleigh quotient of the PSD operator
    const double wn = w.norm();
    if (wn == 0.0) return 0.0;  // v in the null space: F v = 0
    v = w / wn;
  }
  return eig;
}

}  // namespace usar
