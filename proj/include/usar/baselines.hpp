#pragma once

#include "usar/encoder.hpp"

#include <vector>

namespace usar {

struct BaselineConfig {
  int iterations = 100;
  double alpha = 1e-6;
  double lambda = 30.0;
  Penalty penalty = Penalty::L1;

  void validate() const;
};

struct ObjectiveRow {
  int iteration = 0;
  double data_term = 0.0;     // 0.5 |F rho - d|^2
  double penalty_term = 0.0;  // |rho|_1 or nnz(rho)
  double objective = 0.0;     // data_term + lambda * penalty_term
};

struct BaselineResult {
  RVector rho;  // final iterate, not sup-normalized
  std::vector<ObjectiveRow> trace;
  bool step_size_ok = true;  // alpha <= 1 / sigma_max^2(F)
};

// Classic ISTA (L1) or IHTA (L0, c = 0) with fixed Q = I - alpha F^H F and
// bias alpha F^H d. Iterations reuse the encoder layer_step, so a run is
// bit-identical to an untrained L-layer encoder without the final
// normalization. Warns on stderr when alpha exceeds the descent bound.
BaselineResult run_baseline(const ForwardModel& model, const Measurement& d,
                            const BaselineConfig& config);

}  // namespace usar
