#include "usar/cli.hpp"

#include "usar/baselines.hpp"
#include "usar/config.hpp"
#include "usar/encoder.hpp"
#include "usar/geometry.hpp"
#include "usar/io.hpp"
#include "usar/metrics.hpp"
#include "usar/rng.hpp"
#include "usar/scene.hpp"
#include "usar/training.hpp"
#include "usar/version.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

namespace usar::cli {

namespace {

namespace fs = std::filesystem;

// Seed sub-stream tags; fixed so every artifact is a pure function of the
// config seed.
constexpr std::uint64_t kTrainSceneStream = 100;
constexpr std::uint64_t kTrainNoiseStream = 200;
constexpr std::uint64_t kTestNoiseStream = 300;
constexpr std::uint64_t kEvalStream = 400;
constexpr std::uint64_t kPowerIterStream = 500;

struct CommonFlags {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> penalty;
  std::optional<int> layers;
  std::optional<double> lambda;
};

ExperimentConfig resolve_config(const CommonFlags& flags) {
  ExperimentConfig cfg;
  if (!flags.config_path.empty()) cfg = load_config(flags.config_path);
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.penalty) cfg.penalty = *flags.penalty;
  if (flags.layers) cfg.layers = *flags.layers;
  if (flags.lambda) cfg.lambda = *flags.lambda;
  cfg.validate();
  return cfg;
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw UsarError("cannot create output directory " + dir + ": " + ec.message());
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void write_manifest(const std::string& dir, const ExperimentConfig& cfg,
                    const std::string& command) {
  const std::string canon = canonical_config(cfg);
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(io::fnv1a(canon)));
  std::ostringstream out;
  out << "command = " << command << "\n"
      << "config_hash = " << hash << "\n"
      << "seed = " << cfg.seed << "\n"
      << "version = " << kVersion << "\n"
      << "checkpoint_version = " << kCheckpointVersion << "\n";
  io::write_file(join(dir, "manifest.txt"), out.str());
  io::write_file(join(dir, "config_effective.txt"), canon);
}

// The model data is synthesized through (exact, needs the transmitter) and
// the model training starts from (transmitter term dropped when it is
// unknown or explicitly ignored).
ForwardModel true_model(const ExperimentConfig& cfg) {
  const ImagingGeometry geometry = geometry_from_config(cfg);
  if (!geometry.transmitter)
    throw UsarError("this command needs a transmitter position to synthesize data");
  return build_forward_model(geometry, cfg.kappa);
}

ForwardModel init_model(const ExperimentConfig& cfg) {
  const ImagingGeometry geometry = geometry_from_config(cfg);
  if (!cfg.assume_transmitter_unknown) {
    if (!geometry.transmitter)
      throw UsarError("assume_transmitter_unknown = false needs a transmitter position");
    return build_forward_model(geometry, cfg.kappa);
  }
  return init_unknown_model(geometry, nullptr, cfg.kappa);
}

double resolve_alpha(const ExperimentConfig& cfg, const ForwardModel& f0) {
  if (cfg.alpha) return *cfg.alpha;
  const double norm_sq = spectral_norm_sq(f0, 100, derive_seed(cfg.seed, kPowerIterStream));
  if (norm_sq == 0.0) throw NumericalError("alpha: model has zero spectral norm");
  return 1.0 / norm_sq;
}

TrainingSet make_training_set(const ExperimentConfig& cfg, const ForwardModel& f_true) {
  TrainingSet set;
  const GridShape grid{cfg.grid_rows, cfg.grid_cols};
  for (int t = 0; t < cfg.training_samples; ++t) {
    const Scene scene = gen_training_scene(
        grid, derive_seed(cfg.seed, kTrainSceneStream + static_cast<std::uint64_t>(t)));
    Measurement m = synthesize(f_true, scene);
    m = add_noise(m, cfg.snr_db,
                  derive_seed(cfg.seed, kTrainNoiseStream + static_cast<std::uint64_t>(t)));
    set.scenes.push_back(scene);
    set.measurements.push_back(std::move(m));
  }
  return set;
}

EncoderParams initial_encoder(const ExperimentConfig& cfg, const ForwardModel& f0,
                              double alpha) {
  EncoderParams params;
  params.F = f0;
  params.Q = initial_filter(f0, alpha);
  params.alpha = alpha;
  params.tau = alpha * cfg.lambda;
  params.penalty = cfg.penalty_kind();
  params.c = cfg.penalty_kind() == Penalty::L0 ? cfg.c : 0.0;
  params.layers = cfg.layers;
  params.validate();
  return params;
}

struct TrainedRun {
  TrainResult result;
  double alpha = 0.0;
};

TrainedRun run_training(const ExperimentConfig& cfg) {
  const ForwardModel f_true = true_model(cfg);
  const ForwardModel f0 = init_model(cfg);
  const double alpha = resolve_alpha(cfg, f0);
  const TrainingSet set = make_training_set(cfg, f_true);
  const EncoderParams initial = initial_encoder(cfg, f0, alpha);
  TrainConfig tc = train_config_from(cfg);
  TrainedRun run;
  run.result = train(initial, set, tc);
  run.alpha = alpha;
  return run;
}

void write_trained_checkpoint(const std::string& path, const ExperimentConfig& cfg,
                              const EncoderParams& params) {
  io::TrainedCheckpoint ckpt;
  ckpt.model = params.F;
  ckpt.Q = params.Q;
  ckpt.tau = params.tau;
  ckpt.alpha = params.alpha;
  ckpt.lambda = cfg.lambda;
  ckpt.penalty = params.penalty;
  ckpt.layers = static_cast<std::uint32_t>(params.layers);
  ckpt.has_encoder = true;
  io::write_trained(path, ckpt);
}

RVector sup_normalize(const RVector& image) {
  const double peak = image.cwiseAbs().maxCoeff();
  return peak > 0.0 ? RVector(image / peak) : image;
}

// Checkpoints store only the pixel count; recover the export grid from the
// config when consistent, else fall back to a square layout.
GridShape grid_for(const ExperimentConfig& cfg, Eigen::Index pixels) {
  if (static_cast<Eigen::Index>(cfg.grid_rows) * cfg.grid_cols == pixels)
    return GridShape{cfg.grid_rows, cfg.grid_cols};
  const int side = static_cast<int>(std::llround(std::sqrt(static_cast<double>(pixels))));
  if (static_cast<Eigen::Index>(side) * side == pixels) return GridShape{side, side};
  throw UsarError("cannot infer the image grid for " + std::to_string(pixels) +
                  " pixels; pass a config whose grid matches the checkpoint");
}

void export_image(const std::string& dir, const std::string& stem, const RVector& image,
                  GridShape grid) {
  io::write_pgm(join(dir, stem + ".pgm"), image, grid);
  io::write_image_csv(join(dir, stem + ".csv"), image, grid);
}

void write_metrics_csv(const std::string& path, const MetricsReport& report) {
  std::vector<std::vector<double>> rows;
  for (const RealizationMetrics& r : report.rows)
    rows.push_back({static_cast<double>(r.realization), r.L_d, r.L_rho,
                    r.C_rho.defined ? r.C_rho.value : 0.0,
                    r.C_rho.defined ? 1.0 : 0.0});
  rows.push_back({-1.0, report.mean_L_d, report.mean_L_rho,
                  report.mean_C_rho.defined ? report.mean_C_rho.value : 0.0,
                  report.mean_C_rho.defined ? 1.0 : 0.0});
  io::write_csv(path, {"realization", "L_d", "L_rho", "C_rho", "C_rho_defined"}, rows);
}

MetricsReport evaluate_checkpoint(const ExperimentConfig& cfg,
                                  const io::TrainedCheckpoint& ckpt) {
  const ForwardModel f_true = true_model(cfg);
  const Scene phantom = phantom_from_config(cfg);
  EvalProtocol protocol;
  protocol.snr_db = cfg.snr_db;
  protocol.realizations = cfg.eval_realizations;
  protocol.seed = derive_seed(cfg.seed, kEvalStream);

  Reconstructor method;
  if (ckpt.has_encoder) {
    const EncoderParams params = io::to_encoder_params(ckpt);
    method = [params](const Measurement& m) {
      return forward_propagate(params, m).rho_star;
    };
  } else {
    BaselineConfig bc;
    bc.iterations = cfg.baseline_iterations;
    bc.alpha = cfg.alpha ? *cfg.alpha : resolve_alpha(cfg, ckpt.model);
    bc.lambda = cfg.lambda;
    bc.penalty = cfg.penalty_kind();
    const ForwardModel model = ckpt.model;
    method = [model, bc](const Measurement& m) { return run_baseline(model, m, bc).rho; };
  }
  return evaluate(method, ckpt.model, f_true, phantom, protocol);
}

// ---- subcommand bodies -------------------------------------------------

int cmd_make_model(const CommonFlags& flags) {
  const ExperimentConfig cfg = resolve_config(flags);
  ensure_out_dir(flags.out_dir);
  const ForwardModel f0 = init_model(cfg);
  io::write_model(join(flags.out_dir, "model_init.usar"), f0);
  const ImagingGeometry geometry = geometry_from_config(cfg);
  if (geometry.transmitter) {
    io::write_model(join(flags.out_dir, "model_true.usar"),
                    build_forward_model(geometry, cfg.kappa));
  }
  write_manifest(flags.out_dir, cfg, "make-model");
  std::cout << "wrote model_init.usar"
            << (geometry.transmitter ? " and model_true.usar" : "") << " to "
            << flags.out_dir << "\n";
  return 0;
}

int cmd_gen_data(const CommonFlags& flags) {
  const ExperimentConfig cfg = resolve_config(flags);
  ensure_out_dir(flags.out_dir);
  const ForwardModel f_true = true_model(cfg);
  const TrainingSet set = make_training_set(cfg, f_true);
  for (std::size_t t = 0; t < set.size(); ++t) {
    char name[64];
    std::snprintf(name, sizeof name, "train_scene_%03zu.txt", t);
    io::write_scene(join(flags.out_dir, name), set.scenes[t]);
    std::snprintf(name, sizeof name, "train_meas_%03zu.umea", t);
    io::write_measurement(join(flags.out_dir, name), set.measurements[t]);
  }
  const Scene phantom = phantom_from_config(cfg);
  io::write_scene(join(flags.out_dir, "phantom.txt"), phantom);
  Measurement test = synthesize(f_true, phantom);
  test = add_noise(test, cfg.snr_db, derive_seed(cfg.seed, kTestNoiseStream));
  io::write_measurement(join(flags.out_dir, "test_meas.umea"), test);
  write_manifest(flags.out_dir, cfg, "gen-data");
  std::cout << "wrote " << set.size() << " training samples, phantom.txt and "
            << "test_meas.umea to " << flags.out_dir << "\n";
  return 0;
}

int cmd_train(const CommonFlags& flags) {
  const ExperimentConfig cfg = resolve_config(flags);
  ensure_out_dir(flags.out_dir);
  const TrainedRun run = run_training(cfg);
  write_trained_checkpoint(join(flags.out_dir, "trained.usar"), cfg, run.result.params);
  io::write_history_csv(join(flags.out_dir, "history.csv"), run.result.history);
  write_manifest(flags.out_dir, cfg, "train");
  std::cout << "trained " << run.result.history.size() << " epoch(s); best epoch "
            << run.result.best_epoch
            << (run.result.stopped_early ? " (stopped early)" : "") << "; avg L_d "
            << run.result.history[static_cast<std::size_t>(run.result.best_epoch)]
                   .avg_mismatch
            << "; wrote trained.usar and history.csv to " << flags.out_dir << "\n";
  return 0;
}

int cmd_reconstruct(const CommonFlags& flags, const std::string& model_path,
                    const std::string& measurement_path) {
  const ExperimentConfig cfg = resolve_config(flags);
  ensure_out_dir(flags.out_dir);
  const io::TrainedCheckpoint ckpt = io::read_checkpoint(model_path);
  const EncoderParams params = io::to_encoder_params(ckpt);
  const Measurement m = io::read_measurement(measurement_path);
  const LayerCache cache = forward_propagate(params, m);
  if (cache.degenerate)
    throw NumericalError("reconstruction produced an all-zero image");
  const GridShape grid = grid_for(cfg, params.pixel_count());
  export_image(flags.out_dir, "image", cache.rho_star, grid);
  write_manifest(flags.out_dir, cfg, "reconstruct");
  std::cout << "wrote image.pgm and image.csv to " << flags.out_dir << "\n";
  return 0;
}

int cmd_baseline(const CommonFlags& flags, const std::string& model_path,
                 const std::string& measurement_path) {
  const ExperimentConfig cfg = resolve_config(flags);
  ensure_out_dir(flags.out_dir);
  const io::TrainedCheckpoint ckpt = io::read_checkpoint(model_path);
  const Measurement m = io::read_measurement(measurement_path);
  BaselineConfig bc;
  bc.iterations = cfg.baseline_iterations;
  bc.alpha = cfg.alpha ? *cfg.alpha : resolve_alpha(cfg, ckpt.model);
  bc.lambda = cfg.lambda;
  bc.penalty = cfg.penalty_kind();
  const BaselineResult result = run_baseline(ckpt.model, m, bc);

  std::vector<std::vector<double>> rows;
  for (const ObjectiveRow& r : result.trace)
    rows.push_back({static_cast<double>(r.iteration), r.data_term, r.penalty_term,
                    r.objective});
  io::write_csv(join(flags.out_dir, "trace.csv"),
                {"iteration", "data_term", "penalty_term", "objective"}, rows);
  const GridShape grid = grid_for(cfg, ckpt.model.pixel_count());
  export_image(flags.out_dir, "image", sup_normalize(result.rho), grid);
  write_manifest(flags.out_dir, cfg, "baseline");
  std::cout << "ran " << bc.iterations << " iterations; wrote trace.csv, image.pgm and "
            << "image.csv to " << flags.out_dir << "\n";
  return 0;
}

int cmd_evaluate(const CommonFlags& flags, const std::string& model_path) {
  const ExperimentConfig cfg = resolve_config(flags);
  ensure_out_dir(flags.out_dir);
  const io::TrainedCheckpoint ckpt = io::read_checkpoint(model_path);
  const MetricsReport report = evaluate_checkpoint(cfg, ckpt);
  write_metrics_csv(join(flags.out_dir, "metrics.csv"), report);
  write_manifest(flags.out_dir, cfg, "evaluate");
  std::cout << "evaluated " << report.rows.size() << " realization(s): mean L_d "
            << report.mean_L_d << ", mean L_rho " << report.mean_L_rho << ", mean C_rho ";
  if (report.mean_C_rho.defined)
    std::cout << report.mean_C_rho.value;
  else
    std::cout << "undefined";
  std::cout << "; wrote metrics.csv to " << flags.out_dir << "\n";
  return 0;
}

int cmd_sweep(const CommonFlags& flags, const std::string& kind,
              const std::vector<double>& values) {
  const ExperimentConfig base = resolve_config(flags);
  ensure_out_dir(flags.out_dir);
  const SweepRunner runner = [&](double value) {
    ExperimentConfig cfg = base;
    if (kind == "lambda") {
      cfg.lambda = value;
    } else if (kind == "layers") {
      cfg.layers = static_cast<int>(value);
      if (cfg.layers < 1 || static_cast<double>(cfg.layers) != value)
        throw UsarError("sweep: layers values must be positive integers");
    } else if (kind == "training-size") {
      cfg.training_samples = static_cast<int>(value);
      if (cfg.training_samples < 1 || static_cast<double>(cfg.training_samples) != value)
        throw UsarError("sweep: training-size values must be positive integers");
    } else {
      throw UsarError("sweep: kind must be lambda, layers or training-size");
    }
    cfg.validate();
    const TrainedRun run = run_training(cfg);
    io::TrainedCheckpoint ckpt;
    ckpt.model = run.result.params.F;
    ckpt.Q = run.result.params.Q;
    ckpt.tau = run.result.params.tau;
    ckpt.alpha = run.result.params.alpha;
    ckpt.lambda = cfg.lambda;
    ckpt.penalty = run.result.params.penalty;
    ckpt.layers = static_cast<std::uint32_t>(run.result.params.layers);
    ckpt.has_encoder = true;
    return evaluate_checkpoint(cfg, ckpt);
  };
  const std::vector<SweepRow> rows = sweep(values, runner);

  std::vector<std::vector<double>> csv;
  for (const SweepRow& r : rows)
    csv.push_back({r.value, r.mean_L_rho, r.mean_C_rho.defined ? r.mean_C_rho.value : 0.0,
                   r.mean_C_rho.defined ? 1.0 : 0.0, r.mean_L_d});
  io::write_csv(join(flags.out_dir, "sweep.csv"),
                {"value", "mean_L_rho", "mean_C_rho", "mean_C_rho_defined", "mean_L_d"},
                csv);
  write_manifest(flags.out_dir, base, "sweep");
  std::cout << "swept " << kind << " over " << values.size()
            << " value(s); wrote sweep.csv to " << flags.out_dir << "\n";
  return 0;
}

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "experiment config file");
  cmd->add_option("--out", flags.out_dir, "output directory (default .)");
  cmd->add_option("--seed", flags.seed, "override the config seed");
  cmd->add_option("--penalty", flags.penalty, "override the penalty: l1 or l0")
      ->check(CLI::IsMember({"l1", "l0"}));
  cmd->add_option("--layers", flags.layers, "override the layer count")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--lambda", flags.lambda, "override the regularization weight");
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"unsupervised unrolled proximal-gradient reconstruction for passive radar"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  CommonFlags flags;
  std::string model_path, measurement_path, sweep_kind;
  std::vector<double> sweep_values;

  CLI::App* make_model = app.add_subcommand("make-model", "build the forward model");
  add_common(make_model, flags);

  CLI::App* gen_data = app.add_subcommand("gen-data", "generate training and test data");
  add_common(gen_data, flags);

  CLI::App* train_cmd = app.add_subcommand("train", "train the encoder unsupervised");
  add_common(train_cmd, flags);

  CLI::App* reconstruct =
      app.add_subcommand("reconstruct", "run a trained encoder on a measurement");
  add_common(reconstruct, flags);
  reconstruct->add_option("--model", model_path, "trained checkpoint")->required();
  reconstruct->add_option("--measurement", measurement_path, "measurement file")
      ->required();

  CLI::App* baseline = app.add_subcommand("baseline", "run the iterative solver");
  add_common(baseline, flags);
  baseline->add_option("--model", model_path, "model checkpoint")->required();
  baseline->add_option("--measurement", measurement_path, "measurement file")->required();

  CLI::App* evaluate_cmd =
      app.add_subcommand("evaluate", "noise-realization metrics for a checkpoint");
  add_common(evaluate_cmd, flags);
  evaluate_cmd->add_option("--model", model_path, "checkpoint to evaluate")->required();

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "train/evaluate across a parameter");
  add_common(sweep_cmd, flags);
  sweep_cmd->add_option("--kind", sweep_kind, "lambda, layers or training-size")
      ->required()
      ->check(CLI::IsMember({"lambda", "layers", "training-size"}));
  sweep_cmd->add_option("--values", sweep_values, "comma-separated values")
      ->required()
      ->delimiter(',');

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (make_model->parsed()) return cmd_make_model(flags);
    if (gen_data->parsed()) return cmd_gen_data(flags);
    if (train_cmd->parsed()) return cmd_train(flags);
    if (reconstruct->parsed()) return cmd_reconstruct(flags, model_path, measurement_path);
    if (baseline->parsed()) return cmd_baseline(flags, model_path, measurement_path);
    if (evaluate_cmd->parsed()) return cmd_evaluate(flags, model_path);
    if (sweep_cmd->parsed()) return cmd_sweep(flags, sweep_kind, sweep_values);
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace usar::cli
