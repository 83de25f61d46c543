#include <doctest.h>

#include "usar/baselines.hpp"
#include "usar/encoder.hpp"
#include "usar/geometry.hpp"
#include "usar/scene.hpp"

#include <cmath>

using namespace usar;

namespace {

struct Fixture {
  ForwardModel model;
  Measurement d;
  double alpha = 0.0;
};

Fixture small_problem() {
  const ImagingGeometry g =
      make_circular_geometry(160.0, GridShape{8, 8}, 7000.0, 6500.0, 20, 5, 760e6, 8e6,
                             Vec3(11200.0, 11200.0, 6500.0));
  Fixture f;
  f.model = build_forward_model(g, 1.0);
  const Scene phantom = gen_phantom(GridShape{8, 8}, {RectSpec{2, 3, 3, 2}});
  f.d = synthesize(f.model, phantom);
  // Same probe seed as the solver's internal descent check, run longer: the
  // Rayleigh estimate grows with iterations, so this alpha sits at or below
  // the solver's own bound.
  f.alpha = 1.0 / spectral_norm_sq(f.model, 200, 7);
  return f;
}

}  // namespace

TEST_CASE("soft-penalty iterations never increase the objective") {
  const Fixture f = small_problem();
  BaselineConfig cfg;
  cfg.iterations = 60;
  cfg.alpha = f.alpha;
  cfg.lambda = 1e3;
  cfg.penalty = Penalty::L1;

  const BaselineResult r = run_baseline(f.model, f.d, cfg);
  CHECK(r.step_size_ok);
  REQUIRE(r.trace.size() == 61);  // the zero start plus one row per iteration
  for (std::size_t i = 1; i < r.trace.size(); ++i) {
    const double prev = r.trace[i - 1].objective;
    CHECK(r.trace[i].objective <= prev + 1e-9 * std::max(1.0, std::abs(prev)));
  }
}

TEST_CASE("trace rows decompose the objective") {
  const Fixture f = small_problem();
  BaselineConfig cfg;
  cfg.iterations = 5;
  cfg.alpha = f.alpha;
  cfg.lambda = 500.0;
  cfg.penalty = Penalty::L1;

  const BaselineResult r = run_baseline(f.model, f.d, cfg);
  // row 0 is the zero iterate
  CHECK(r.trace[0].iteration == 0);
  CHECK(r.trace[0].data_term == doctest::Approx(0.5 * f.d.data.squaredNorm()).epsilon(1e-12));
  CHECK(r.trace[0].penalty_term == 0.0);
  for (const ObjectiveRow& row : r.trace)
    CHECK(row.objective ==
          doctest::Approx(row.data_term + cfg.lambda * row.penalty_term).epsilon(1e-12));
}

TEST_CASE("hard-penalty trace counts nonzeros") {
  const Fixture f = small_problem();
  BaselineConfig cfg;
  cfg.iterations = 8;
  cfg.alpha = f.alpha;
  cfg.lambda = 100.0;
  cfg.penalty = Penalty::L0;

  const BaselineResult r = run_baseline(f.model, f.d, cfg);
  int nnz = 0;
  for (int i = 0; i < r.rho.size(); ++i) nnz += r.rho(i) != 0.0;
  CHECK(r.trace.back().penalty_term == doctest::Approx(double(nnz)));
}

TEST_CASE("iterations match an untrained encoder run without normalization") {
  const Fixture f = small_problem();
  const int iters = 12;

  BaselineConfig cfg;
  cfg.iterations = iters;
  cfg.alpha = f.alpha;
  cfg.lambda = 800.0;
  cfg.penalty = Penalty::L1;
  const BaselineResult r = run_baseline(f.model, f.d, cfg);

  EncoderParams p;
  p.F = f.model;
  p.alpha = f.alpha;
  p.Q = initial_filter(f.model, f.alpha);
  p.tau = f.alpha * cfg.lambda;
  p.penalty = Penalty::L1;
  p.layers = iters;
  const LayerCache cache = forward_propagate(p, f.d.data);

  CHECK((r.rho - cache.rho.back()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("hard-penalty iterations use the exact threshold, not the surrogate") {
  const Fixture f = small_problem();
  BaselineConfig cfg;
  cfg.iterations = 10;
  cfg.alpha = f.alpha;
  cfg.lambda = 100.0;
  cfg.penalty = Penalty::L0;
  const BaselineResult r = run_baseline(f.model, f.d, cfg);

  EncoderParams p;
  p.F = f.model;
  p.alpha = f.alpha;
  p.Q = initial_filter(f.model, f.alpha);
  p.tau = f.alpha * cfg.lambda;
  p.penalty = Penalty::L0;
  p.c = 0.0;  // exact hard thresholding
  p.layers = 10;
  const LayerCache cache = forward_propagate(p, f.d.data);

  CHECK((r.rho - cache.rho.back()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("an oversized step is reported") {
  const Fixture f = small_problem();
  BaselineConfig cfg;
  cfg.iterations = 3;
  cfg.alpha = 1e6 * f.alpha;
  cfg.lambda = 1.0;
  cfg.penalty = Penalty::L1;
  const BaselineResult r = run_baseline(f.model, f.d, cfg);
  CHECK(!r.step_size_ok);
}

TEST_CASE("baseline configuration validation") {
  BaselineConfig cfg;
  cfg.iterations = 0;
  CHECK_THROWS_AS(cfg.validate(), UsarError);
  cfg.iterations = 10;
  cfg.alpha = -1.0;
  CHECK_THROWS_AS(cfg.validate(), UsarError);
  cfg.alpha = 1e-6;
  cfg.lambda = -5.0;
  CHECK_THROWS_AS(cfg.validate(), UsarError);
}
