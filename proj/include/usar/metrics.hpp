#pragma once

#include "usar/geometry.hpp"
#include "usar/scene.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace usar {

// Contrast is undefined (infinite) when the background variance vanishes; it
// is reported as a flag, never as a number.
struct ContrastValue {
  double value = 0.0;
  bool defined = false;
};

// Normalized data-domain error |F rho* - d|^2 / |d|^2. Throws for d = 0.
double data_mismatch(const ForwardModel& model, const RVector& rho_star, const CVector& d);

// Normalized image-domain error |rho* - rho|^2 / |rho|^2.
double image_error(const RVector& rho_star, const RVector& rho_true);

// |E[foreground] - E[background]|^2 / var[background] with population
// statistics. The mask marks foreground pixels; background needs >= 2 pixels.
ContrastValue contrast(const RVector& rho_star, const std::vector<bool>& foreground_mask);

struct RealizationMetrics {
  int realization = 0;
  double L_d = 0.0;
  double L_rho = 0.0;
  ContrastValue C_rho;
};

struct MetricsReport {
  std::vector<RealizationMetrics> rows;
  double mean_L_d = 0.0;
  double mean_L_rho = 0.0;
  ContrastValue mean_C_rho;   // over defined realizations only
  int undefined_contrast = 0;
};

struct EvalProtocol {
  double snr_db = 50.0;
  int realizations = 20;
  std::uint64_t seed = 0;
};

// A reconstruction method: measurement -> image on the phantom grid.
using Reconstructor = std::function<RVector(const Measurement&)>;

// Noise-realization protocol: synthesizes phantom data through f_true, adds
// noise per realization, reconstructs, and averages the figures of merit. All
// images are sup-normalized before metrics so normalized and raw-magnitude
// methods compare on equal footing. f_mismatch is the model the method itself
// reconstructs against (learned F for the network, F0 for baselines).
MetricsReport evaluate(const Reconstructor& method, const ForwardModel& f_mismatch,
                       const ForwardModel& f_true, const Scene& phantom,
                       const EvalProtocol& protocol);

struct SweepRow {
  double value = 0.0;
  double mean_L_rho = 0.0;
  ContrastValue mean_C_rho;
  double mean_L_d = 0.0;
};

// Trains/evaluates one configuration per value; rows keep input order.
using SweepRunner = std::function<MetricsReport(double)>;
std::vector<SweepRow> sweep(const std::vector<double>& values, const SweepRunner& runner);

// Spearman rank correlation (average ranks on ties).
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace usar
