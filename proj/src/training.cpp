#include "usar/training.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>
#include <string>

namespace usar {

void TrainConfig::validate() const {
  if (epochs < 1) throw UsarError("training: need at least one epoch");
  if (!(eta_Q >= 0.0) || !(eta_F >= 0.0) || !(eta_tau >= 0.0))
    throw UsarError("training: learning rates must be nonnegative");
  if (!(lambda >= 0.0)) throw UsarError("training: lambda must be nonnegative");
}

double mismatch(const CVector& d_star, const CVector& d) {
  if (d_star.size() != d.size()) throw DimensionError("mismatch: size mismatch");
  return (d_star - d).squaredNorm();
}

RVector grad_rho_star(const LayerCache& cache, const ForwardModel& F, const CVector& d,
                      bool* skipped) {
  if (skipped) *skipped = false;
  const Eigen::Index M = F.pixel_count();
  if (cache.degenerate) {
    if (skipped) *skipped = true;
    return RVector::Zero(M);
  }
  const CVector d_star = F.entries * cache.rho_star.cast<Complex>();
  const CVector r = d_star - d;
  const RVector v = 2.0 * (F.entries.adjoint() * r).real();

  const double a = cache.sup_norm;
  RVector g = v / a;
  g(cache.argmax_index) -= cache.rho.back().dot(v) / (a * a);
  return g;
}

CMatrix grad_Q_layer(const LayerCache& cache, int k, const RVector& grad_rs) {
  if (k < 1 || k > cache.layer_count()) throw UsarError("grad_Q_layer: layer out of range");
  const Eigen::Index M = grad_rs.size();
  CMatrix out = CMatrix::Zero(M, M);
  const CVector& z = cache.z[static_cast<std::size_t>(k - 1)];
  const RVector& f = cache.magnitudes[static_cast<std::size_t>(k - 1)];
  const RVector& rho_prev = cache.rho[static_cast<std::size_t>(k - 1)];
  for (int i : cache.active[static_cast<std::size_t>(k - 1)]) {
    const Complex coef = (grad_rs(i) / 2.0) * (z(i) / f(i));
    out.row(i) = coef * rho_prev.transpose().cast<Complex>();
  }
  return out;
}

CMatrix grad_F_layer(const LayerCache& cache, int k, const RVector& grad_rs,
                     const CVector& d, double alpha) {
  if (k < 1 || k > cache.layer_count()) throw UsarError("grad_F_layer: layer out of range");
  const Eigen::Index M = grad_rs.size();
  CMatrix out = CMatrix::Zero(d.size(), M);
  const CVector& z = cache.z[static_cast<std::size_t>(k - 1)];
  const RVector& f = cache.magnitudes[static_cast<std::size_t>(k - 1)];
  for (int i : cache.active[static_cast<std::size_t>(k - 1)]) {
    const Complex coef = (alpha * grad_rs(i) / 2.0) * (std::conj(z(i)) / f(i));
    out.col(i) = coef * d;
  }
  return out;
}

double grad_tau_total(const LayerCache& cache, const RVector& grad_rs, Penalty penalty,
                      double c) {
  double total = 0.0;
  for (const auto& idx : cache.active)
    for (int i : idx) total -= grad_rs(i);
  return penalty == Penalty::L0 ? c * total : total;
}

namespace {

std::string sample_tag(std::size_t t) { return "sample " + std::to_string(t); }

void check_finite(const CVector& v, const std::string& where) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (!std::isfinite(v(i).real()) || !std::isfinite(v(i).imag()))
      throw NumericalError("nonfinite value in " + where);
}

}  // namespace

GradientBundle accumulate_gradients(const EncoderParams& params,
                                    const TrainingSet& training_set) {
  params.validate();
  if (training_set.size() == 0)
    throw DimensionError("accumulate_gradients: empty training set");

  const Eigen::Index M = params.pixel_count();
  const Eigen::Index N = params.measurement_count();

  GradientBundle bundle;
  // Accumulated transposed: per-layer updates touch rows of grad_Q, and
  // column writes are contiguous in Eigen's storage.
  CMatrix grad_Q_t = CMatrix::Zero(M, M);
  bundle.grad_F = CMatrix::Zero(N, M);
  bundle.sample_loss.resize(training_set.size());
  bundle.sample_mismatch.resize(training_set.size());
  bundle.skipped.assign(training_set.size(), 0);

  std::size_t used = 0;
  for (std::size_t t = 0; t < training_set.size(); ++t) {
    const CVector& d = training_set.measurements[t].data;
    check_finite(d, sample_tag(t) + " measurement");

    const LayerCache cache = forward_propagate(params, d);
    bundle.multiply_count += static_cast<std::uint64_t>(N) * M;  // bias
    bundle.multiply_count +=
        static_cast<std::uint64_t>(params.layers) * M * M;  // Q rho per layer
    for (int k = 1; k <= params.layers; ++k)
      check_finite(cache.z[static_cast<std::size_t>(k - 1)],
                   sample_tag(t) + " layer " + std::to_string(k));

    const double d_norm_sq = d.squaredNorm();
    if (d_norm_sq == 0.0)
      throw NumericalError("accumulate_gradients: zero measurement in " + sample_tag(t));

    if (cache.degenerate) {
      bundle.skipped[t] = 1;
      bundle.sample_loss[t] = std::numeric_limits<double>::quiet_NaN();
      bundle.sample_mismatch[t] = 1.0;  // d* = 0
      continue;
    }

    const CVector d_star = params.F.entries * cache.rho_star.cast<Complex>();
    const CVector r = d_star - d;
    const RVector v = 2.0 * (params.F.entries.adjoint() * r).real();
    bundle.multiply_count += 2ULL * static_cast<std::uint64_t>(N) * M;

    const double a = cache.sup_norm;
    RVector g = v / a;
    g(cache.argmax_index) -= cache.rho.back().dot(v) / (a * a);
    bundle.multiply_count += 2ULL * static_cast<std::uint64_t>(M);
    for (Eigen::Index i = 0; i < M; ++i)
      if (!std::isfinite(g(i)))
        throw NumericalError("nonfinite gradient in " + sample_tag(t));

    double g_tau = 0.0;
    for (int k = 1; k <= params.layers; ++k) {
      const CVector& z = cache.z[static_cast<std::size_t>(k - 1)];
      const RVector& f = cache.magnitudes[static_cast<std::size_t>(k - 1)];
      const CVector rho_prev = cache.rho[static_cast<std::size_t>(k - 1)].cast<Complex>();
      for (int i : cache.active[static_cast<std::size_t>(k - 1)]) {
        const Complex phase = z(i) / f(i);
        const Complex coef_q = (g(i) / 2.0) * phase;
        const Complex coef_f = (params.alpha * g(i) / 2.0) * std::conj(phase);
        grad_Q_t.col(i) += coef_q * rho_prev;
        bundle.grad_F.col(i) += coef_f * d;
        bundle.multiply_count += static_cast<std::uint64_t>(M) + N + 4;
        g_tau -= g(i);
      }
    }
    if (params.penalty == Penalty::L0) g_tau *= params.c;

    // Decoder contribution: residual times the normalized image.
    bundle.grad_F.noalias() += r * cache.rho_star.transpose().cast<Complex>();
    bundle.multiply_count += static_cast<std::uint64_t>(N) * M;

    bundle.grad_tau += g_tau;
    bundle.sample_loss[t] = r.squaredNorm();
    bundle.sample_mismatch[t] = bundle.sample_loss[t] / d_norm_sq;
    ++used;
  }

  if (used == 0)
    throw NumericalError(
        "accumulate_gradients: every sample produced a zero image; nothing to learn "
        "(threshold too high?)");

  const double scale = 1.0 / static_cast<double>(used);
  bundle.grad_Q = (grad_Q_t * scale).transpose();
  bundle.grad_F *= scale;
  bundle.grad_tau *= scale;
  return bundle;
}

ForwardModel project_F(const CMatrix& raw, double kappa) {
  if (!(kappa > 0.0)) throw UsarError("project_F: kappa must be positive");
  ForwardModel out;
  out.kappa = kappa;
  out.entries.resize(raw.rows(), raw.cols());
  for (Eigen::Index j = 0; j < raw.cols(); ++j)
    for (Eigen::Index i = 0; i < raw.rows(); ++i) {
      const Complex x = raw(i, j);
      const double mag = std::abs(x);
      out.entries(i, j) = mag == 0.0 ? Complex(kappa, 0.0) : (kappa / mag) * x;
    }
  return out;
}

TrainResult train(const EncoderParams& initial, const TrainingSet& training_set,
                  const TrainConfig& config) {
  config.validate();
  initial.validate();
  if (training_set.size() == 0) throw DimensionError("train: empty training set");

  TrainResult result;
  result.params = initial;
  EncoderParams current = initial;
  double best = std::numeric_limits<double>::infinity();

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const GradientBundle bundle = accumulate_gradients(current, training_set);

    double avg = 0.0;
    int skipped = 0;
    for (std::size_t t = 0; t < training_set.size(); ++t) {
      avg += bundle.sample_mismatch[t];
      skipped += bundle.skipped[t];
    }
    avg /= static_cast<double>(training_set.size());
    if (skipped > 0)
      std::cerr << "train: epoch " << epoch << ": " << skipped
                << " sample(s) gave a zero image and were excluded from the gradient\n";

    const double decay = 1.0 / (1.0 + epoch);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.avg_mismatch = avg;
    rec.eta_Q = config.eta_Q * decay;
    rec.eta_F = config.eta_F * decay;
    rec.eta_tau = config.eta_tau * decay;
    rec.tau = current.tau;
    rec.skipped_samples = skipped;

    if (avg < best) {
      best = avg;
      result.params = current;
      result.best_epoch = epoch;
    }
    const bool stop = !result.history.empty() && avg >= result.history.back().avg_mismatch;

    if (!stop) {
      current.Q -= rec.eta_Q * bundle.grad_Q;
      current.F = project_F(current.F.entries - rec.eta_F * bundle.grad_F, current.F.kappa);
      current.tau = project_tau(current.tau - rec.eta_tau * bundle.grad_tau);
    }

    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.history.push_back(rec);

    if (stop) {
      result.stopped_early = true;
      break;
    }
  }
  return result;
}

}  // namespace usar
