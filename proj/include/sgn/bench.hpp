#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sgn/layers.hpp"
#include "sgn/task.hpp"
#include "sgn/training.hpp"

namespace sgn {

// ---------------------------------------------------------------------------
// Tasks.

// The ten test functions, on [-1, 1]^arity with 1000 random train and test
// points each. Names: bessel, chaotic, simple-product, high-freq-sum,
// highly-nonlinear, discontinuous, oscillating-decay, rational, multi-scale,
// exp-sine.
std::vector<TaskSpec> task_registry();

// Registry lookup, plus the extra presets high-freq-sum-pi ([-pi, pi]),
// sin and cos (on [-20, 20]), and square (x^2, train [-1, 1], test
// [-2, -1] u [1, 2]). Throws ParameterError naming the known tasks.
TaskSpec find_task(const std::string& name);
std::vector<std::string> task_names();

TaskSpec sincos_task(bool cosine);
TaskSpec square_extrapolation_task();

// ---------------------------------------------------------------------------
// Models.

enum class ModelFamily { Sgn, SgnUngated, SgnFixedGate, SgnPure, MlpGelu, MlpRelu, Kan };

std::string to_string(ModelFamily f);
ModelFamily parse_model_family(const std::string& s);  // sgn, sgn-ungated, ..., mlp-gelu, kan

struct ModelSpec {
  ModelFamily family = ModelFamily::Sgn;
  std::size_t width = 32;  // d_ff for SGN and MLP, hidden units for KAN
  std::size_t m = 8;
  InitConfig init;
  std::size_t grid = 5;
  std::size_t order = 3;
  std::string label;  // empty: derived from the family
};

ModelSpec model_spec(ModelFamily family, std::size_t width = 32, std::size_t m = 8,
                     const InitConfig& init = {});

std::string model_label(const ModelSpec& spec);

// Builds the model for a task; init draws come from a stream derived from seed.
std::unique_ptr<Regressor> make_regressor(const ModelSpec& spec, const TaskSpec& task,
                                          std::uint64_t seed);

// Total parameters of the model make_regressor would build for this arity.
std::size_t model_parameter_count(const ModelSpec& spec, std::size_t arity);

// Width for MLP/KAN specs whose parameter count is closest to target at this
// arity. SGN specs are returned unchanged.
ModelSpec match_budget(ModelSpec spec, std::size_t arity, std::size_t target);

// ---------------------------------------------------------------------------
// Runners.

struct FitCell {
  std::string model;
  std::string task;
  std::uint64_t seed = 0;
  std::size_t parameter_count = 0;
  bool failed = false;
  std::string error;  // training error message when failed
  ExperimentReport report;
};

// Trains every model on every task for every seed. Models after the first
// that are MLP or KAN are width-matched to the first model's parameter count
// on each task. A failed cell is recorded and the suite continues.
std::vector<FitCell> run_fit_suite(const std::vector<ModelSpec>& models,
                                   const std::vector<TaskSpec>& tasks,
                                   const std::vector<std::uint64_t>& seeds,
                                   const TrainConfig& cfg);

struct SpectrumRecord {
  std::string model;
  bool failed = false;
  std::string error;
  ExperimentReport report;
  Vec prediction;      // on the evaluation grid
  Vec spectrum;        // DFT magnitudes of prediction
  double spectrum_l1 = 0.0;  // sum over bins of |spectrum - target spectrum|
};

struct SincosResult {
  std::string task;
  Vec grid;
  Vec target;
  Vec target_spectrum;
  std::vector<SpectrumRecord> models;
};

struct SincosConfig {
  std::size_t width = 64;
  std::size_t m = 8;
  std::size_t grid_points = 2048;
  InitConfig init;
  TrainConfig train;  // defaults: 1000 epochs, lr 1e-3
};

// Fits sin and cos on [-20, 20] with SGN (the given width) and budget-matched
// MLP-GELU, MLP-ReLU and KAN models.
std::vector<SincosResult> run_sincos_experiment(const SincosConfig& cfg);

struct ExtrapolationRow {
  std::string model;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  double train_mse = 0.0;
  double extrapolation_mse = 0.0;
};

struct ExtrapolationConfig {
  std::size_t width = 32;
  std::size_t m = 8;
  InitConfig init;
  TrainConfig train;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  double train_lo = -1.0;
  double train_hi = 1.0;
  double test_lo = -2.0;
  double test_hi = 2.0;  // test set is [test_lo, train_lo] u [train_hi, test_hi]
};

// MLP-GELU, pure-spectral SGN and hybrid SGN on x^2.
std::vector<ExtrapolationRow> run_extrapolation_experiment(const ExtrapolationConfig& cfg);

struct SpectralProbeConfig {
  std::size_t grid_points = 1024;
  std::size_t probe_every = 10;
  std::vector<std::size_t> bands{1, 8, 32};
  double threshold = 0.1;
};

struct BandResult {
  std::size_t band = 0;
  bool skipped = false;  // target magnitude below 1e-12
  std::optional<std::size_t> converged_epoch;  // first probe epoch with e_k < threshold
  double final_error = 0.0;
};

struct ProbeResult {
  std::string model;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  std::vector<BandResult> bands;
  std::vector<std::size_t> probe_epochs;
  std::vector<Vec> band_errors;  // [probe][band]
};

// f(x) = sin(2 pi x) + sin(16 pi x) + sin(64 pi x) sampled at x_i = i / n on [0, 1).
TaskSpec three_tone_task(std::size_t grid_points);

// Trains on the probe grid itself. Band errors are measured every probe_every
// epochs, after that epoch's update; epochs are counted from 1.
ProbeResult spectral_bias_probe(Regressor& model, const TaskSpec& task,
                                const SpectralProbeConfig& probe, const TrainConfig& cfg);

// Relative residual per band: |DFT[f - fhat]_k| / |DFT[f]_k|. Empty optional
// for bands whose target magnitude is below 1e-12.
std::vector<std::optional<double>> band_errors(std::span<const double> target,
                                               std::span<const double> prediction,
                                               std::span<const std::size_t> bands);

struct GateAblationConfig {
  std::size_t width = 32;
  std::size_t m = 8;
  InitConfig init;
  TrainConfig train;
  std::vector<std::string> tasks{"bessel", "high-freq-sum", "oscillating-decay"};
  std::vector<std::uint64_t> seeds{0, 1, 2};
};

// Gated, ungated (phi + Psi) and fixed-gate (phi + 0.1 Psi) SGN on the tasks.
std::vector<FitCell> run_gate_ablation(const GateAblationConfig& cfg);

}  // namespace sgn
