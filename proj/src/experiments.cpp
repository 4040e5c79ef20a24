#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "sgn/bench.hpp"
#include "sgn/errors.hpp"
#include "sgn/spline.hpp"

namespace sgn {
namespace {

constexpr double kPi = std::numbers::pi;

TaskSpec unit_task(std::string name, std::size_t arity, TargetFn f) {
  TaskSpec t;
  t.name = std::move(name);
  t.arity = arity;
  t.target = std::move(f);
  t.train_domain = cube(arity, -1.0, 1.0);
  t.test_domain = t.train_domain;
  return t;
}

double high_freq_sum(double x) {
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) s += std::sin(k * x / 100.0);
  return s;
}

double discontinuous(double x) {
  if (x < -0.5) return -1.0;
  if (x < 0.0) return x * x;
  if (x < 0.5) return std::sin(4.0 * kPi * x);
  return 1.0;
}

}  // namespace

std::vector<TaskSpec> task_registry() {
  using S = std::span<const double>;
  std::vector<TaskSpec> out;
  out.push_back(unit_task("bessel", 1, [](S x) { return bessel_j0(20.0 * x[0]); }));
  out.push_back(unit_task("chaotic", 2, [](S x) {
    return std::exp(std::sin(kPi * x[0]) + x[1] * x[1]);
  }));
  out.push_back(unit_task("simple-product", 2, [](S x) { return x[0] * x[1]; }));
  out.push_back(unit_task("high-freq-sum", 1, [](S x) { return high_freq_sum(x[0]); }));
  out.push_back(unit_task("highly-nonlinear", 4, [](S x) {
    return std::exp(std::sin(x[0] * x[0] + x[1] * x[1]) + std::sin(x[2] * x[2] + x[3] * x[3]));
  }));
  out.push_back(unit_task("discontinuous", 1, [](S x) { return discontinuous(x[0]); }));
  out.push_back(unit_task("oscillating-decay", 1, [](S x) {
    return std::exp(-x[0] * x[0]) * std::sin(10.0 * kPi * x[0]);
  }));
  out.push_back(unit_task("rational", 2, [](S x) {
    const double r = x[0] * x[0] + x[1] * x[1];
    return r / (1.0 + r);
  }));
  out.push_back(unit_task("multi-scale", 3, [](S x) {
    return std::tanh(x[0] * x[1] * x[2]) +
           std::sin(kPi * x[0]) * std::cos(kPi * x[1]) * std::exp(-x[2] * x[2]);
  }));
  out.push_back(unit_task("exp-sine", 2, [](S x) {
    const double a = x[0] - 0.5;
    const double b = x[1] - 0.5;
    return std::sin(50.0 * x[0]) * std::cos(50.0 * x[1]) + std::exp(-(a * a + b * b) / 0.1);
  }));
  return out;
}

TaskSpec sincos_task(bool cosine) {
  TaskSpec t;
  t.name = cosine ? "cos" : "sin";
  t.arity = 1;
  if (cosine) {
    t.target = [](std::span<const double> x) { return std::cos(x[0]); };
  } else {
    t.target = [](std::span<const double> x) { return std::sin(x[0]); };
  }
  t.train_domain = cube(1, -20.0, 20.0);
  t.test_domain = t.train_domain;
  return t;
}

TaskSpec square_extrapolation_task() {
  TaskSpec t;
  t.name = "square";
  t.arity = 1;
  t.target = [](std::span<const double> x) { return x[0] * x[0]; };
  t.train_domain = cube(1, -1.0, 1.0);
  t.test_domain = {Box{{-2.0}, {-1.0}}, Box{{1.0}, {2.0}}};
  return t;
}

std::vector<std::string> task_names() {
  std::vector<std::string> names;
  for (const auto& t : task_registry()) names.push_back(t.name);
  for (const char* extra : {"high-freq-sum-pi", "sin", "cos", "square", "three-tone"}) {
    names.emplace_back(extra);
  }
  return names;
}

TaskSpec find_task(const std::string& name) {
  for (auto& t : task_registry()) {
    if (t.name == name) return t;
  }
  if (name == "high-freq-sum-pi") {
    TaskSpec t = unit_task(name, 1, [](std::span<const double> x) { return high_freq_sum(x[0]); });
    t.train_domain = cube(1, -kPi, kPi);
    t.test_domain = t.train_domain;
    return t;
  }
  if (name == "sin" || name == "cos") return sincos_task(name == "cos");
  if (name == "square") return square_extrapolation_task();
  if (name == "three-tone") return three_tone_task(1024);
  std::string known;
  for (const auto& n : task_names()) known += (known.empty() ? "" : ", ") + n;
  throw ParameterError("unknown task '" + name + "' (known: " + known + ")");
}

// ---------------------------------------------------------------------------

std::string to_string(ModelFamily f) {
  switch (f) {
    case ModelFamily::Sgn: return "sgn";
    case ModelFamily::SgnUngated: return "sgn-ungated";
    case ModelFamily::SgnFixedGate: return "sgn-fixed-gate";
    case ModelFamily::SgnPure: return "sgn-pure";
    case ModelFamily::MlpGelu: return "mlp-gelu";
    case ModelFamily::MlpRelu: return "mlp-relu";
    case ModelFamily::Kan: return "kan";
  }
  return "?";
}

ModelFamily parse_model_family(const std::string& s) {
  for (auto f : {ModelFamily::Sgn, ModelFamily::SgnUngated, ModelFamily::SgnFixedGate,
                 ModelFamily::SgnPure, ModelFamily::MlpGelu, ModelFamily::MlpRelu,
                 ModelFamily::Kan}) {
    if (to_string(f) == s) return f;
  }
  throw ParameterError("unknown model '" + s + "'");
}

ModelSpec model_spec(ModelFamily family, std::size_t width, std::size_t m, const InitConfig& init) {
  ModelSpec s;
  s.family = family;
  s.width = width;
  s.m = m;
  s.init = init;
  return s;
}

std::string model_label(const ModelSpec& spec) {
  if (!spec.label.empty()) return spec.label;
  switch (spec.family) {
    case ModelFamily::Sgn: return "SGN";
    case ModelFamily::SgnUngated: return "SGN-NoGate";
    case ModelFamily::SgnFixedGate: return "SGN-FixedGate";
    case ModelFamily::SgnPure: return "PureSpectral";
    case ModelFamily::MlpGelu: return "MLP-GELU";
    case ModelFamily::MlpRelu: return "MLP-ReLU";
    case ModelFamily::Kan: return "KAN";
  }
  return "?";
}

namespace {

bool is_sgn(ModelFamily f) {
  return f == ModelFamily::Sgn || f == ModelFamily::SgnUngated ||
         f == ModelFamily::SgnFixedGate || f == ModelFamily::SgnPure;
}

SpectralBranch branch_of(ModelFamily f) {
  switch (f) {
    case ModelFamily::SgnUngated: return SpectralBranch::Ungated;
    case ModelFamily::SgnFixedGate: return SpectralBranch::FixedGate;
    case ModelFamily::SgnPure: return SpectralBranch::PureSpectral;
    default: return SpectralBranch::Gated;
  }
}

std::uint64_t init_seed(std::uint64_t seed) { return Rng(seed ^ 0x9e3779b97f4a7c15ULL).next_u64(); }

void domain_bounds(const TaskSpec& task, Vec& lo, Vec& hi) {
  lo.assign(task.arity, 0.0);
  hi.assign(task.arity, 0.0);
  for (std::size_t i = 0; i < task.arity; ++i) {
    lo[i] = task.train_domain.front().lo[i];
    hi[i] = task.train_domain.front().hi[i];
    for (const auto& b : task.train_domain) {
      lo[i] = std::min(lo[i], b.lo[i]);
      hi[i] = std::max(hi[i], b.hi[i]);
    }
  }
}

}  // namespace

std::unique_ptr<Regressor> make_regressor(const ModelSpec& spec, const TaskSpec& task,
                                          std::uint64_t seed) {
  if (spec.width == 0) throw ParameterError("model width must be positive");
  Rng rng(init_seed(seed));
  const std::string label = model_label(spec);
  if (is_sgn(spec.family)) {
    InitConfig init = spec.init;
    init.seed = seed;
    SgnParams p = homotopy_init(task.arity, spec.width, spec.m, 1, init, rng);
    p.branch = branch_of(spec.family);
    return std::make_unique<SgnRegressor>(std::move(p), label);
  }
  if (spec.family == ModelFamily::Kan) {
    SplineLayerParams a = spline_layer_init(task.arity, spec.width, spec.grid, spec.order, rng);
    SplineLayerParams b = spline_layer_init(spec.width, 1, spec.grid, spec.order, rng);
    Vec lo, hi;
    domain_bounds(task, lo, hi);
    return std::make_unique<KanRegressor>(std::move(a), std::move(b), std::move(lo), std::move(hi));
  }
  const Activation act = spec.family == ModelFamily::MlpRelu ? Activation::Relu : Activation::Gelu;
  return std::make_unique<MlpRegressor>(mlp_init(task.arity, spec.width, 1, act, rng), label);
}

std::size_t model_parameter_count(const ModelSpec& spec, std::size_t arity) {
  const std::size_t w = spec.width;
  if (is_sgn(spec.family)) {
    // W1, b1, Wr, br, Ar, wg, bg, LN affine, W2, b2
    return w * arity + w + w * spec.m + spec.m + 2 * spec.m * w + 4 * w + w + 1;
  }
  if (spec.family == ModelFamily::Kan) {
    const std::size_t edge = spec.grid + spec.order + 3;
    return arity * w * edge + w + w * edge + 1;
  }
  return w * arity + w + w + 1;
}

ModelSpec match_budget(ModelSpec spec, std::size_t arity, std::size_t target) {
  if (is_sgn(spec.family)) return spec;
  std::size_t best = 1;
  std::size_t best_gap = static_cast<std::size_t>(-1);
  for (std::size_t w = 1; w <= target; ++w) {
    spec.width = w;
    const std::size_t p = model_parameter_count(spec, arity);
    const std::size_t gap = p > target ? p - target : target - p;
    if (gap < best_gap) {
      best_gap = gap;
      best = w;
    }
    if (p > target) break;
  }
  spec.width = best;
  return spec;
}

// ---------------------------------------------------------------------------

namespace {

FitCell run_cell(const ModelSpec& spec, const TaskSpec& task, const TaskData& data,
                 std::uint64_t seed, TrainConfig cfg) {
  FitCell cell;
  cell.model = model_label(spec);
  cell.task = task.name;
  cell.seed = seed;
  cfg.seed = seed;
  auto model = make_regressor(spec, task, seed);
  cell.parameter_count = model->parameter_count();
  try {
    cell.report = train_regression(*model, data, task.name, cfg);
  } catch (const TrainingError& e) {
    cell.failed = true;
    cell.error = e.what();
  }
  return cell;
}

}  // namespace

std::vector<FitCell> run_fit_suite(const std::vector<ModelSpec>& models,
                                   const std::vector<TaskSpec>& tasks,
                                   const std::vector<std::uint64_t>& seeds,
                                   const TrainConfig& cfg) {
  if (models.empty()) throw ParameterError("fit suite needs at least one model");
  std::vector<FitCell> cells;
  for (const auto& task : tasks) {
    const std::size_t budget = model_parameter_count(models.front(), task.arity);
    for (std::uint64_t seed : seeds) {
      const TaskData data = make_task_data(task, seed);
      for (std::size_t i = 0; i < models.size(); ++i) {
        const ModelSpec spec = i == 0 ? models[i] : match_budget(models[i], task.arity, budget);
        cells.push_back(run_cell(spec, task, data, seed, cfg));
      }
    }
  }
  return cells;
}

std::vector<SincosResult> run_sincos_experiment(const SincosConfig& cfg) {
  ModelSpec sgn_spec = model_spec(ModelFamily::Sgn, cfg.width, cfg.m, cfg.init);
  std::vector<ModelSpec> specs{sgn_spec, model_spec(ModelFamily::MlpGelu), model_spec(ModelFamily::MlpRelu),
                               model_spec(ModelFamily::Kan)};
  std::vector<SincosResult> results;
  for (bool cosine : {false, true}) {
    const TaskSpec task = sincos_task(cosine);
    SincosResult res;
    res.task = task.name;
    const double lo = task.train_domain.front().lo[0];
    const double hi = task.train_domain.front().hi[0];
    for (std::size_t i = 0; i < cfg.grid_points; ++i) {
      const double x = lo + (hi - lo) * static_cast<double>(i) / cfg.grid_points;
      res.grid.push_back(x);
      res.target.push_back(task.target(std::span<const double>(&x, 1)));
    }
    res.target_spectrum = dft_magnitudes(res.target);
    const TaskData data = make_task_data(task, cfg.train.seed);
    const std::size_t budget = model_parameter_count(sgn_spec, 1);
    for (const auto& raw_spec : specs) {
      const ModelSpec spec = match_budget(raw_spec, 1, budget);
      SpectrumRecord rec;
      rec.model = model_label(spec);
      auto model = make_regressor(spec, task, cfg.train.seed);
      try {
        rec.report = train_regression(*model, data, task.name, cfg.train);
      } catch (const TrainingError& e) {
        rec.failed = true;
        rec.error = e.what();
        res.models.push_back(std::move(rec));
        continue;
      }
      for (double x : res.grid) rec.prediction.push_back(model->predict(std::span<const double>(&x, 1)));
      rec.spectrum = dft_magnitudes(rec.prediction);
      for (std::size_t k = 0; k < rec.spectrum.size(); ++k) {
        rec.spectrum_l1 += std::fabs(rec.spectrum[k] - res.target_spectrum[k]);
      }
      res.models.push_back(std::move(rec));
    }
    results.push_back(std::move(res));
  }
  return results;
}

std::vector<ExtrapolationRow> run_extrapolation_experiment(const ExtrapolationConfig& cfg) {
  if (!(cfg.test_lo < cfg.train_lo && cfg.train_lo < cfg.train_hi && cfg.train_hi < cfg.test_hi)) {
    throw ParameterError("extrapolation intervals must satisfy test_lo < train_lo < train_hi < test_hi");
  }
  TaskSpec task = square_extrapolation_task();
  task.train_domain = cube(1, cfg.train_lo, cfg.train_hi);
  task.test_domain = {Box{{cfg.test_lo}, {cfg.train_lo}}, Box{{cfg.train_hi}, {cfg.test_hi}}};
  const ModelSpec hybrid = model_spec(ModelFamily::Sgn, cfg.width, cfg.m, cfg.init);
  const ModelSpec pure = model_spec(ModelFamily::SgnPure, cfg.width, cfg.m, cfg.init);
  const std::size_t budget = model_parameter_count(hybrid, 1);
  const std::vector<ModelSpec> specs{match_budget(model_spec(ModelFamily::MlpGelu), 1, budget), pure, hybrid};

  std::vector<ExtrapolationRow> rows;
  for (std::uint64_t seed : cfg.seeds) {
    const TaskData data = make_task_data(task, seed);
    for (const auto& spec : specs) {
      ExtrapolationRow row;
      row.model = model_label(spec);
      row.seed = seed;
      TrainConfig train = cfg.train;
      train.seed = seed;
      train.eval_every = train.epochs;
      auto model = make_regressor(spec, task, seed);
      try {
        train_regression(*model, data, task.name, train);
        row.train_mse = model->loss(data.train);
        row.extrapolation_mse = model->loss(data.test);
      } catch (const TrainingError& e) {
        row.failed = true;
        row.error = e.what();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------

TaskSpec three_tone_task(std::size_t grid_points) {
  TaskSpec t;
  t.name = "three-tone";
  t.arity = 1;
  t.target = [](std::span<const double> x) {
    return std::sin(2.0 * kPi * x[0]) + std::sin(16.0 * kPi * x[0]) + std::sin(64.0 * kPi * x[0]);
  };
  t.train_domain = cube(1, 0.0, 1.0);
  t.test_domain = t.train_domain;
  t.n_train = grid_points;
  t.n_test = grid_points;
  t.sampling = Sampling::UniformGrid;
  return t;
}

std::vector<std::optional<double>> band_errors(std::span<const double> target,
                                               std::span<const double> prediction,
                                               std::span<const std::size_t> bands) {
  if (target.size() != prediction.size()) throw ShapeError("band_errors: length mismatch");
  Vec residual(target.size());
  for (std::size_t i = 0; i < target.size(); ++i) residual[i] = target[i] - prediction[i];
  const Vec ft = dft_magnitudes(target);
  const Vec fr = dft_magnitudes(residual);
  std::vector<std::optional<double>> out;
  for (std::size_t k : bands) {
    if (k >= ft.size()) throw ParameterError("band " + std::to_string(k) + " beyond the DFT range");
    if (ft[k] < 1e-12) {
      out.emplace_back();
    } else {
      out.emplace_back(fr[k] / ft[k]);
    }
  }
  return out;
}

ProbeResult spectral_bias_probe(Regressor& model, const TaskSpec& task,
                                const SpectralProbeConfig& probe, const TrainConfig& cfg) {
  if (task.arity != 1) throw ParameterError("spectral probe needs a 1-D task");
  if (probe.grid_points < 2 || probe.probe_every == 0) {
    throw ParameterError("spectral probe needs grid_points >= 2 and probe_every >= 1");
  }
  for (std::size_t k : probe.bands) {
    if (k > probe.grid_points / 2) {
      throw ParameterError("band " + std::to_string(k) + " beyond the DFT range");
    }
  }
  const double lo = task.train_domain.front().lo[0];
  const double hi = task.train_domain.front().hi[0];
  Dataset grid{DenseMatrix(probe.grid_points, 1), Vec(probe.grid_points)};
  for (std::size_t i = 0; i < probe.grid_points; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / probe.grid_points;
    grid.x(i, 0) = x;
    grid.y[i] = task.target(std::span<const double>(&x, 1));
  }

  ProbeResult res;
  res.model = model.name();
  res.seed = cfg.seed;
  res.bands.resize(probe.bands.size());
  for (std::size_t b = 0; b < probe.bands.size(); ++b) res.bands[b].band = probe.bands[b];

  auto measure = [&](std::size_t epoch, const Regressor& m) {
    const auto errs = band_errors(grid.y, m.predict_all(grid.x), probe.bands);
    Vec row(errs.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t b = 0; b < errs.size(); ++b) {
      BandResult& br = res.bands[b];
      if (!errs[b]) {
        br.skipped = true;
        continue;
      }
      row[b] = *errs[b];
      br.final_error = *errs[b];
      if (!br.converged_epoch && *errs[b] < probe.threshold) br.converged_epoch = epoch;
    }
    res.probe_epochs.push_back(epoch);
    res.band_errors.push_back(std::move(row));
  };

  TrainConfig train = cfg;
  train.eval_every = std::max(train.epochs, std::size_t{1});
  const TaskData data{grid, grid};
  try {
    train_regression(model, data, task.name, train, [&](std::size_t epoch, const Regressor& m) {
      if ((epoch + 1) % probe.probe_every == 0) measure(epoch + 1, m);
    });
  } catch (const TrainingError& e) {
    res.failed = true;
    res.error = e.what();
  }
  return res;
}

std::vector<FitCell> run_gate_ablation(const GateAblationConfig& cfg) {
  std::vector<TaskSpec> tasks;
  for (const auto& name : cfg.tasks) tasks.push_back(find_task(name));
  const std::vector<ModelSpec> models{model_spec(ModelFamily::Sgn, cfg.width, cfg.m, cfg.init),
                                      model_spec(ModelFamily::SgnUngated, cfg.width, cfg.m, cfg.init),
                                      model_spec(ModelFamily::SgnFixedGate, cfg.width, cfg.m, cfg.init)};
  return run_fit_suite(models, tasks, cfg.seeds, cfg.train);
}

}  // namespace sgn
