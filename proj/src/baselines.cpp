#include "usar/baselines.hpp"

#include "usar/geometry.hpp"

#include <cmath>
#include <iostream>

namespace usar {

void BaselineConfig::validate() const {
  if (iterations < 1) throw UsarError("baseline: need at least one iteration");
  if (!(alpha > 0.0)) throw UsarError("baseline: alpha must be positive");
  if (!(lambda >= 0.0)) throw UsarError("baseline: lambda must be nonnegative");
}

BaselineResult run_baseline(const ForwardModel& model, const Measurement& d,
                            const BaselineConfig& config) {
  config.validate();
  if (d.data.size() != model.measurement_count())
    throw DimensionError("baseline: measurement size does not match the model");

  EncoderParams params;
  params.F = model;
  params.Q = initial_filter(model, config.alpha);
  params.alpha = config.alpha;
  params.tau = config.alpha * config.lambda;
  params.penalty = config.penalty;
  params.c = 0.0;  // exact hard thresholding
  params.layers = 1;
  params.validate();

  BaselineResult result;
  const double norm_sq = spectral_norm_sq(model, 50, 7);
  result.step_size_ok = norm_sq == 0.0 || config.alpha <= 1.0 / norm_sq * (1.0 + 1e-9);
  if (!result.step_size_ok)
    std::cerr << "baseline: step size " << config.alpha
              << " exceeds the descent bound 1/sigma_max^2 = " << 1.0 / norm_sq
              << "; the objective may diverge\n";

  const CVector bias = config.alpha * (model.entries.adjoint() * d.data);
  RVector rho = RVector::Zero(model.pixel_count());

  const auto record = [&](int it) {
    ObjectiveRow row;
    row.iteration = it;
    row.data_term = 0.5 * (model.entries * rho.cast<Complex>() - d.data).squaredNorm();
    if (config.penalty == Penalty::L1) {
      row.penalty_term = rho.cwiseAbs().sum();
    } else {
      row.penalty_term = static_cast<double>((rho.array() != 0.0).count());
    }
    row.objective = row.data_term + config.lambda * row.penalty_term;
    result.trace.push_back(row);
  };

  result.trace.reserve(config.iterations + 1);
  record(0);
  for (int it = 1; it <= config.iterations; ++it) {
    rho = layer_step(params, rho, bias).rho_next;
    record(it);
  }
  result.rho = std::move(rho);
  return result;
}

}  // namespace usar
