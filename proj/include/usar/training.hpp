#pragma once

#include "usar/encoder.hpp"

#include <cstdint>
#include <vector>

namespace usar {

struct TrainConfig {
  int epochs = 7;
  double eta_Q = 1e-9;
  double eta_F = 1e-5;
  double eta_tau = 1e-14;
  // Rate used at epoch l is eta / (1 + l), l = 0, 1, ...
  double lambda = 30.0;  // initial regularizer; tau_0 = alpha * lambda

  void validate() const;
};

// Batch-averaged gradients plus per-sample diagnostics for one pass over the
// training set.
struct GradientBundle {
  CMatrix grad_Q;   // M x M
  CMatrix grad_F;   // N x M, includes the decoder term
  double grad_tau = 0.0;
  std::vector<double> sample_loss;      // |d* - d|^2, NaN for skipped samples
  std::vector<double> sample_mismatch;  // |d* - d|^2 / |d|^2
  std::vector<char> skipped;            // degenerate normalization
  std::uint64_t multiply_count = 0;     // complex multiplies spent on gradients
};

// Squared l2 mismatch |d_star - d|^2.
double mismatch(const CVector& d_star, const CVector& d);

// Loss gradient with respect to the normalized output:
//   ( -(1/a^2) e_m (rho^L)^T + (1/a) I ) 2 Re{ F^H (d* - d) }
// with a = |rho^L|_inf and m the cached argmax. Zero vector (and *skipped =
// true when provided) for a degenerate cache.
RVector grad_rho_star(const LayerCache& cache, const ForwardModel& F, const CVector& d,
                      bool* skipped = nullptr);

// Layer k contribution (k in 1..L) to the Q gradient: active rows i get
// (g_i / 2) (z^k_i / |z^k_i|) (rho^{k-1})^T, inactive rows are zero.
CMatrix grad_Q_layer(const LayerCache& cache, int k, const RVector& grad_rs);

// Layer k contribution to the F gradient: active columns i get
// (alpha g_i / 2) (conj(z^k_i) / |z^k_i|) d, inactive columns are zero.
CMatrix grad_F_layer(const LayerCache& cache, int k, const RVector& grad_rs,
                     const CVector& d, double alpha);

// Threshold derivative summed over layers and active indices,
// sum_k sum_{i in I_k} -g_i, scaled by c for the hard activation.
double grad_tau_total(const LayerCache& cache, const RVector& grad_rs, Penalty penalty,
                      double c);

// Full-batch gradients averaged over the training set. Degenerate samples are
// excluded from both the sum and the divisor; throws NumericalError when every
// sample is degenerate or a nonfinite value appears (message names the sample
// and layer).
GradientBundle accumulate_gradients(const EncoderParams& params,
                                    const TrainingSet& training_set);

// Entrywise projection onto modulus kappa; zero entries map to kappa * (1+0i).
ForwardModel project_F(const CMatrix& raw, double kappa);

inline double project_tau(double tau_raw) { return tau_raw < 0.0 ? 0.0 : tau_raw; }

struct EpochRecord {
  int epoch = 0;
  double avg_mismatch = 0.0;  // mean |F rho* - d|^2 / |d|^2 over the set
  double eta_Q = 0.0;
  double eta_F = 0.0;
  double eta_tau = 0.0;
  double tau = 0.0;
  double wall_seconds = 0.0;
  int skipped_samples = 0;
};

struct TrainResult {
  EncoderParams params;  // snapshot from the best epoch
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  bool stopped_early = false;
};

// Projected batch gradient descent. Each epoch measures the average data
// mismatch with the entering parameters, then applies one additive update to Q
// and projected updates to F and tau with rates eta / (1 + epoch). Training
// stops once the average mismatch fails to decrease; the returned parameters
// are the snapshot from the epoch with the lowest average mismatch.
TrainResult train(const EncoderParams& initial, const TrainingSet& training_set,
                  const TrainConfig& config);

}  // namespace usar
