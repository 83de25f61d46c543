#include "usar/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace usar {

double EncoderParams::threshold_level() const {
  return penalty == Penalty::L1 ? tau : std::sqrt(tau);
}

void EncoderParams::validate() const {
  if (F.entries.size() == 0) throw DimensionError("encoder: forward model is empty");
  if (Q.rows() != Q.cols()) throw DimensionError("encoder: Q must be square");
  if (Q.rows() != F.entries.cols())
    throw DimensionError("encoder: Q size does not match the model's pixel count");
  if (!(tau >= 0.0)) throw UsarError("encoder: tau must be nonnegative");
  if (!(alpha > 0.0)) throw UsarError("encoder: alpha must be positive");
  if (!(c >= 0.0 && c < 1.0)) throw UsarError("encoder: c must lie in [0, 1)");
  if (layers < 1) throw UsarError("encoder: need at least one layer");
}

CMatrix initial_filter(const ForwardModel& model, double alpha) {
  if (!(alpha > 0.0)) throw UsarError("initial_filter: alpha must be positive");
  CMatrix Q = -alpha * (model.entries.adjoint() * model.entries);
  Q.diagonal().array() += 1.0;
  return Q;
}

RVector soft_threshold(const CVector& z, double tau) {
  RVector out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) out(i) = std::max(std::abs(z(i)) - tau, 0.0);
  return out;
}

RVector hard_threshold(const CVector& z, double tau, double c) {
  const double level = std::sqrt(tau);
  RVector out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double mag = std::abs(z(i));
    // Strict step: the jump happens only past the threshold, u(0) = 0.
    out(i) = std::max(mag - level, 0.0) + (mag > level ? (1.0 - c) * level : 0.0);
  }
  return out;
}

LayerStepResult layer_step(const EncoderParams& params, const RVector& rho_prev,
                           const CVector& bias) {
  LayerStepResult step;
  step.z = bias;
  step.z.noalias() += params.Q * rho_prev.cast<Complex>();

  const double level = params.threshold_level();
  const Eigen::Index M = step.z.size();
  step.rho_next.resize(M);
  for (Eigen::Index i = 0; i < M; ++i) {
    const double mag = std::abs(step.z(i));
    if (mag > level) {
      step.active.push_back(static_cast<int>(i));
      step.rho_next(i) = params.penalty == Penalty::L1
                             ? mag - level
                             : mag - level + (1.0 - params.c) * level;
    } else {
      step.rho_next(i) = 0.0;
    }
  }
  return step;
}

LayerCache forward_propagate(const EncoderParams& params, const CVector& d) {
  params.validate();
  if (d.size() != params.measurement_count())
    throw DimensionError("forward_propagate: measurement size does not match the model");

  const Eigen::Index M = params.pixel_count();
  const CVector bias = params.alpha * (params.F.entries.adjoint() * d);

  LayerCache cache;
  cache.rho.reserve(params.layers + 1);
  cache.z.reserve(params.layers);
  cache.magnitudes.reserve(params.layers);
  cache.active.reserve(params.layers);
  cache.rho.push_back(RVector::Zero(M));

  for (int k = 1; k <= params.layers; ++k) {
    LayerStepResult step = layer_step(params, cache.rho.back(), bias);
    cache.magnitudes.push_back(step.z.cwiseAbs());
    cache.z.push_back(std::move(step.z));
    cache.active.push_back(std::move(step.active));
    cache.rho.push_back(std::move(step.rho_next));
  }

  const RVector& last = cache.rho.back();
  cache.sup_norm = 0.0;
  cache.argmax_index = 0;
  for (Eigen::Index i = 0; i < last.size(); ++i) {
    const double mag = std::abs(last(i));
    if (mag > cache.sup_norm) {  // strict: ties keep the lowest index
      cache.sup_norm = mag;
      cache.argmax_index = static_cast<int>(i);
    }
  }
  if (cache.sup_norm == 0.0) {
    cache.degenerate = true;
    cache.rho_star = RVector::Zero(M);
  } else {
    cache.rho_star = last / cache.sup_norm;
  }
  return cache;
}

}  // namespace usar
