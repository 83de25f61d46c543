#pragma once

#include "usar/encoder.hpp"
#include "usar/training.hpp"

#include <string>

namespace usar::oracle {

// Straight element-by-element transcription of the closed-form layer
// gradients. No vectorization, no shortcuts: nested scalar loops with the
// active-set logic spelled out. Used as the independent reference the fast
// path is checked against.
GradientBundle naive_gradients(const EncoderParams& params, const Measurement& d);

// Central finite differences of the sample loss with respect to each real
// parameter coordinate. Complex entries are probed on the real and imaginary
// axes separately and combined as (d/dRe + i d/dIm)/2, matching the
// convention of the closed-form expressions. Non-differentiable samples
// (active-set boundaries within `step` of a threshold) are the caller's
// responsibility to avoid.
struct FiniteDiffResult {
  CMatrix grad_Q;
  CMatrix grad_F;
  double grad_tau = 0.0;
  double loss = 0.0;
};

FiniteDiffResult finite_diff_gradients(const EncoderParams& params, const Measurement& d,
                                       double step = 1e-6);

// Worst relative elementwise deviation between two gradient bundles,
// max over Q, F, tau blocks; denominators are max(|ref|, floor).
double gradient_deviation(const GradientBundle& a, const GradientBundle& b,
                          double floor = 1e-12);

// Number of pre-activation magnitudes within `margin` of the threshold level
// across all layers: indices where the loss is (nearly) non-differentiable
// and finite differences are unreliable.
int near_boundary_count(const EncoderParams& params, const Measurement& d,
                        double margin = 1e-8);

// CSV comparison report: one row per parameter block (Q, F, tau) with the
// max relative deviation between the two bundles, plus the count of
// near-boundary (flagged non-differentiable) indices for the instance.
void write_comparison_report(const std::string& path, const EncoderParams& params,
                             const Measurement& d, const GradientBundle& fast,
                             const GradientBundle& naive);

}  // namespace usar::oracle
