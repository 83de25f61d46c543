#pragma once

#include "usar/encoder.hpp"
#include "usar/geometry.hpp"
#include "usar/scene.hpp"
#include "usar/training.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace usar::io {

// --- binary model checkpoints -------------------------------------------
//
// Model file ("USAR"): header {magic, version u32, N u64, M u64, kappa f64}
// followed by N*M complex<f64> entries, row-major, little-endian.
// A trained checkpoint appends Q (M*M complex<f64> row-major) and a scalar
// block {tau f64, alpha f64, lambda f64, penalty u8, layers u32}.

struct TrainedCheckpoint {
  ForwardModel model;
  CMatrix Q;
  double tau = 0.0;
  double alpha = 0.0;
  double lambda = 0.0;
  Penalty penalty = Penalty::L1;
  std::uint32_t layers = 1;
  bool has_encoder = false;  // false: file held only the forward model
};

void write_model(const std::string& path, const ForwardModel& model);
void write_trained(const std::string& path, const TrainedCheckpoint& ckpt);
TrainedCheckpoint read_checkpoint(const std::string& path);

EncoderParams to_encoder_params(const TrainedCheckpoint& ckpt);

// --- binary measurements --------------------------------------------------
//
// Measurement file ("UMEA"): {magic, N u64, snr_db f64, seed u64} then N
// complex<f64> pairs, little-endian.

void write_measurement(const std::string& path, const Measurement& m);
Measurement read_measurement(const std::string& path);

// --- text scenes ------------------------------------------------------
//
// First line "rows cols", then rows*cols whitespace-separated reals.

void write_scene(const std::string& path, const Scene& scene);
Scene read_scene(const std::string& path);

// --- CSV ---------------------------------------------------------------

void write_history_csv(const std::string& path, const std::vector<EpochRecord>& history);

// Generic CSV writer: header row then numeric rows at full precision.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

// --- images ----------------------------------------------------------------

// 16-bit binary PGM; values are clamped to [0, 1] and mapped linearly to
// [0, 65535]. Row-major top-down.
void write_pgm(const std::string& path, const RVector& image, GridShape grid);

// Image as CSV grid (rows lines of cols comma-separated values); round-trips
// exactly through read_image_csv.
void write_image_csv(const std::string& path, const RVector& image, GridShape grid);
std::pair<RVector, GridShape> read_image_csv(const std::string& path);

// --- misc --------------------------------------------------------------

// FNV-1a over the canonicalized key=value lines of a config; stable across
// key reordering in the input file.
std::uint64_t fnv1a(const std::string& bytes);

// Little-endian primitive IO helpers (usable for tests as well).
void put_u32(std::string& out, std::uint32_t v);
void put_u64(std::string& out, std::uint64_t v);
void put_f64(std::string& out, double v);
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

}  // namespace usar::io
