#pragma once

#include "usar/geometry.hpp"
#include "usar/scene.hpp"
#include "usar/types.hpp"

#include <cstdint>
#include <vector>

namespace usar {

// The trainable network: a shared forward model F (encoder bias generator and
// decoder), an image-domain filter Q, and the activation threshold tau. The
// gradient step size alpha is fixed, never learned.
struct EncoderParams {
  ForwardModel F;
  CMatrix Q;           // M x M
  double tau = 0.0;    // >= 0
  double alpha = 1e-6; // > 0
  Penalty penalty = Penalty::L1;
  double c = 1e-5;     // hard-threshold derivative constant, in [0, 1)
  int layers = 1;      // L >= 1

  Eigen::Index pixel_count() const { return Q.rows(); }
  Eigen::Index measurement_count() const { return F.entries.rows(); }

  // Threshold applied to pre-activation magnitudes: tau for the soft
  // activation, sqrt(tau) for the hard one.
  double threshold_level() const;

  void validate() const;
};

// Q = I - alpha F^H F, the image-domain filter of a proximal gradient step.
CMatrix initial_filter(const ForwardModel& model, double alpha);

// Everything backpropagation consumes, recorded during forward propagation.
struct LayerCache {
  std::vector<RVector> rho;          // rho^0 .. rho^L, rho^0 = 0
  std::vector<CVector> z;            // pre-activations z^1 .. z^L
  std::vector<RVector> magnitudes;   // f^k = |z^k|
  std::vector<std::vector<int>> active;  // I_k = { i : f^k_i > threshold }
  double sup_norm = 0.0;             // |rho^L|_inf
  int argmax_index = 0;              // lowest index on ties
  bool degenerate = false;           // rho^L == 0; rho_star forced to 0
  RVector rho_star;                  // rho^L / |rho^L|_inf

  int layer_count() const { return static_cast<int>(z.size()); }
};

// Soft threshold on magnitudes: max(|z_i| - tau, 0). Output is real and
// nonnegative; 1-Lipschitz in |z| and never exceeds |z|.
RVector soft_threshold(const CVector& z, double tau);

// Hard-threshold surrogate:
//   max(|z_i| - sqrt(tau), 0) + (1 - c) sqrt(tau) u(|z_i| - sqrt(tau))
// with the strict unit step u(0) = 0. c = 0 recovers exact hard thresholding
// at level sqrt(tau); a small positive c keeps the threshold learnable.
RVector hard_threshold(const CVector& z, double tau, double c);

struct LayerStepResult {
  RVector rho_next;
  CVector z;
  std::vector<int> active;
};

// One proximal layer: z = Q rho_prev + bias, rho_next = activation(z).
// bias is alpha F^H d, computed once per measurement and reused across layers.
LayerStepResult layer_step(const EncoderParams& params, const RVector& rho_prev,
                           const CVector& bias);

// Runs L layers from rho^0 = 0 and sup-normalizes the output. When rho^L = 0
// the normalization is undefined; the cache flags the sample as degenerate and
// rho_star is the zero vector.
LayerCache forward_propagate(const EncoderParams& params, const CVector& d);

inline LayerCache forward_propagate(const EncoderParams& params, const Measurement& m) {
  return forward_propagate(params, m.data);
}

}  // namespace usar
