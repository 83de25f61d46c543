#include <doctest.h>

#include "usar/geometry.hpp"
#include "usar/rng.hpp"
#include "usar/scene.hpp"

#include <algorithm>
#include <cmath>

using namespace usar;

namespace {

// Bounding box of the nonzero pixels; requires at least one nonzero.
struct Box {
  int r0 = 1 << 30, c0 = 1 << 30, r1 = -1, c1 = -1;
  int height() const { return r1 - r0 + 1; }
  int width() const { return c1 - c0 + 1; }
};

Box bounding_box(const Scene& s) {
  Box b;
  for (int r = 0; r < s.grid.rows; ++r)
    for (int c = 0; c < s.grid.cols; ++c)
      if (s.reflectivity(r * s.grid.cols + c) != 0.0) {
        b.r0 = std::min(b.r0, r);
        b.c0 = std::min(b.c0, c);
        b.r1 = std::max(b.r1, r);
        b.c1 = std::max(b.c1, c);
      }
  return b;
}

ForwardModel small_model() {
  const ImagingGeometry g =
      make_circular_geometry(300.0, GridShape{5, 5}, 7000.0, 6500.0, 6, 4, 760e6, 8e6,
                             Vec3(11200.0, 11200.0, 6500.0));
  return build_forward_model(g, 1.0);
}

}  // namespace

TEST_CASE("training scenes are filled binary rectangles with sizes in [1,6]") {
  const GridShape grid{31, 31};
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Scene s = gen_training_scene(grid, seed);
    REQUIRE(s.reflectivity.size() == 31 * 31);

    int nnz = 0;
    for (int i = 0; i < s.reflectivity.size(); ++i) {
      const double v = s.reflectivity(i);
      REQUIRE((v == 0.0 || v == 1.0));
      nnz += v != 0.0;
    }
    REQUIRE(nnz >= 1);

    const Box b = bounding_box(s);
    CHECK(b.height() >= 1);
    CHECK(b.height() <= 6);
    CHECK(b.width() >= 1);
    CHECK(b.width() <= 6);
    // the rectangle is solid: the box contains exactly the nonzeros
    CHECK(nnz == b.height() * b.width());
  }
}

TEST_CASE("training scene placement respects the border margin") {
  // 31 rows: margin round(3*31/31) = 3 in 1-indexed terms, so pixels with
  // 0-indexed row/col in [2, 27] are allowed and the border is never touched.
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const Box b = bounding_box(gen_training_scene(GridShape{31, 31}, seed));
    CHECK(b.r0 >= 2);
    CHECK(b.c0 >= 2);
    CHECK(b.r1 <= 27);
    CHECK(b.c1 <= 27);
  }
  // 15 rows: margin round(3*15/31) = 1, allowed band [0, 13]; the last row
  // and column stay clear.
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const Box b = bounding_box(gen_training_scene(GridShape{15, 15}, seed));
    CHECK(b.r0 >= 0);
    CHECK(b.r1 <= 13);
    CHECK(b.c1 <= 13);
  }
}

TEST_CASE("training scenes are deterministic in the seed and vary across seeds") {
  const Scene a = gen_training_scene(GridShape{31, 31}, 42);
  const Scene b = gen_training_scene(GridShape{31, 31}, 42);
  CHECK((a.reflectivity - b.reflectivity).norm() == 0.0);

  bool any_different = false;
  for (std::uint64_t seed = 0; seed < 10 && !any_different; ++seed)
    any_different = (gen_training_scene(GridShape{31, 31}, seed).reflectivity -
                     a.reflectivity).norm() != 0.0;
  CHECK(any_different);
}

TEST_CASE("synthesize is the plain forward product") {
  const ForwardModel fm = small_model();
  Scene s;
  s.grid = GridShape{5, 5};
  s.reflectivity = RVector::Zero(25);
  s.reflectivity(7) = 1.0;
  s.reflectivity(13) = 0.5;

  const Measurement m = synthesize(fm, s);
  const CVector expect = fm.entries * s.reflectivity;
  REQUIRE(m.data.size() == expect.size());
  CHECK((m.data - expect).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK(std::isinf(m.snr_db));
}

TEST_CASE("synthesize rejects a scene that does not match the model") {
  const ForwardModel fm = small_model();
  Scene s;
  s.grid = GridShape{4, 4};
  s.reflectivity = RVector::Ones(16);
  CHECK_THROWS_AS(synthesize(fm, s), DimensionError);
}

TEST_CASE("noise injection hits the requested power and is seed-deterministic") {
  Measurement clean;
  clean.data = CVector::Constant(20000, Complex(1.0, 0.0));

  const double snr_db = 20.0;
  const Measurement noisy = add_noise(clean, snr_db, 99);
  REQUIRE(noisy.data.size() == clean.data.size());
  CHECK(noisy.snr_db == snr_db);

  const CVector noise = noisy.data - clean.data;
  const double signal_power = clean.data.squaredNorm();
  const double noise_power = noise.squaredNorm();
  const double achieved_db = 10.0 * std::log10(signal_power / noise_power);
  CHECK(achieved_db == doctest::Approx(snr_db).epsilon(0.01));

  // real and imaginary parts carry half the per-element variance each
  double re_var = 0.0, im_var = 0.0;
  for (int i = 0; i < noise.size(); ++i) {
    re_var += noise(i).real() * noise(i).real();
    im_var += noise(i).imag() * noise(i).imag();
  }
  CHECK(re_var / im_var == doctest::Approx(1.0).epsilon(0.05));

  const Measurement again = add_noise(clean, snr_db, 99);
  CHECK((again.data - noisy.data).cwiseAbs().maxCoeff() == 0.0);
  const Measurement other = add_noise(clean, snr_db, 100);
  CHECK((other.data - noisy.data).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("infinite SNR passes the measurement through untouched") {
  Measurement clean;
  clean.data = CVector::Constant(16, Complex(0.5, -0.25));
  const Measurement out = add_noise(clean, std::numeric_limits<double>::infinity(), 3);
  CHECK((out.data - clean.data).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("noise on an identically zero measurement is rejected") {
  Measurement zero;
  zero.data = CVector::Zero(8);
  CHECK_THROWS_AS(add_noise(zero, 50.0, 1), UsarError);
}

TEST_CASE("phantoms place the requested rectangles") {
  const Scene p = gen_phantom(GridShape{15, 15}, {RectSpec{2, 3, 4, 5}, RectSpec{10, 10, 1, 1}});
  int nnz = 0;
  for (int r = 0; r < 15; ++r)
    for (int c = 0; c < 15; ++c) {
      const bool in_a = r >= 2 && r < 6 && c >= 3 && c < 8;
      const bool in_b = r == 10 && c == 10;
      const double v = p.reflectivity(r * 15 + c);
      CHECK(v == (in_a || in_b ? 1.0 : 0.0));
      nnz += v != 0.0;
    }
  CHECK(nnz == 21);
}

TEST_CASE("phantom rectangles must stay inside the grid") {
  CHECK_THROWS_AS(gen_phantom(GridShape{8, 8}, {RectSpec{6, 6, 4, 4}}), UsarError);
  CHECK_THROWS_AS(gen_phantom(GridShape{8, 8}, {RectSpec{-1, 0, 2, 2}}), UsarError);
}

TEST_CASE("overlapping phantom rectangles stay binary") {
  const Scene p = gen_phantom(GridShape{9, 9}, {RectSpec{1, 1, 4, 4}, RectSpec{2, 2, 4, 4}});
  CHECK(p.reflectivity.maxCoeff() == 1.0);
}
