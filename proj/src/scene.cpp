#include "usar/scene.hpp"

#include "usar/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace usar {

void Scene::validate() const {
  if (grid.rows < 1 || grid.cols < 1) throw UsarError("scene: grid must be at least 1x1");
  if (reflectivity.size() != grid.pixel_count())
    throw DimensionError("scene: reflectivity size does not match grid");
  for (Eigen::Index i = 0; i < reflectivity.size(); ++i) {
    const double v = reflectivity(i);
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
      throw UsarError("scene: reflectivity values must lie in [0, 1]");
  }
}

Scene gen_training_scene(GridShape grid, std::uint64_t seed) {
  if (grid.rows < 1 || grid.cols < 1) throw UsarError("scene: grid must be at least 1x1");
  // The whole rectangle stays inside the band [m, dim - m] (1-indexed) with
  // margin m = round(3 dim / 31), scaled per axis.
  const auto band = [](int dim) {
    const int m = static_cast<int>(std::lround(3.0 * dim / 31.0));
    const int lo = std::max(0, m - 1);       // first allowed 0-indexed pixel
    const int hi = dim - m - 1;              // last allowed 0-indexed pixel
    return std::pair<int, int>(lo, hi);
  };
  const auto [row_lo, row_hi] = band(grid.rows);
  const auto [col_lo, col_hi] = band(grid.cols);
  const int max_h = std::min(6, row_hi - row_lo + 1);
  const int max_w = std::min(6, col_hi - col_lo + 1);
  if (max_h < 1 || max_w < 1)
    throw UsarError("scene: grid too small for a rectangle inside the margin");

  std::mt19937_64 rng(derive_seed(seed, 0x5ce7e));
  const int h = static_cast<int>(uniform_int(rng, 1, max_h));
  const int w = static_cast<int>(uniform_int(rng, 1, max_w));
  const int row = static_cast<int>(uniform_int(rng, row_lo, row_hi - h + 1));
  const int col = static_cast<int>(uniform_int(rng, col_lo, col_hi - w + 1));

  return gen_phantom(grid, {RectSpec{row, col, h, w}});
}

Measurement synthesize(const ForwardModel& model, const Scene& scene) {
  scene.validate();
  if (model.pixel_count() != scene.reflectivity.size())
    throw DimensionError("synthesize: model pixel count does not match scene");
  Measurement m;
  m.data = model.entries * scene.reflectivity.cast<Complex>();
  return m;
}

Measurement add_noise(const Measurement& d, double snr_db, std::uint64_t seed) {
  if (std::isinf(snr_db) && snr_db > 0.0) {
    Measurement out = d;
    out.snr_db = snr_db;
    out.seed = seed;
    return out;
  }
  const Eigen::Index n = d.data.size();
  if (n == 0) throw DimensionError("add_noise: empty measurement");
  const double power = d.data.squaredNorm() / static_cast<double>(n);
  if (power == 0.0) throw UsarError("add_noise: zero measurement has no defined SNR");

  const double sigma_sq = power / std::pow(10.0, snr_db / 10.0);
  const double part_std = std::sqrt(sigma_sq / 2.0);  // per real component

  std::mt19937_64 rng(derive_seed(seed, 0x401e));
  Measurement out;
  out.data.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    out.data(i) = d.data(i) + Complex(part_std * gaussian(rng), part_std * gaussian(rng));
  out.snr_db = snr_db;
  out.seed = seed;
  return out;
}

Scene gen_phantom(GridShape grid, const std::vector<RectSpec>& rects) {
  if (grid.rows < 1 || grid.cols < 1) throw UsarError("scene: grid must be at least 1x1");
  Scene scene;
  scene.grid = grid;
  scene.reflectivity = RVector::Zero(grid.pixel_count());
  for (const RectSpec& r : rects) {
    if (r.height < 1 || r.width < 1 || r.row < 0 || r.col < 0 ||
        r.row + r.height > grid.rows || r.col + r.width > grid.cols)
      throw UsarError("phantom: rectangle does not fit inside the grid");
    for (int i = r.row; i < r.row + r.height; ++i)
      for (int j = r.col; j < r.col + r.width; ++j)
        scene.reflectivity(static_cast<Eigen::Index>(i) * grid.cols + j) = 1.0;
  }
  return scene;
}

}  // namespace usar
