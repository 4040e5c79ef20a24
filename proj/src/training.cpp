#include "sgn/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sgn/errors.hpp"

namespace sgn {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ParameterError("learning_rate must be positive");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw ParameterError("Adam betas must lie in [0, 1)");
  }
  if (epochs == 0) throw ParameterError("epochs must be positive");
  if (eval_every == 0) throw ParameterError("eval_every must be positive");
}

LossValue mse_loss(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size() || pred.empty()) {
    throw ShapeError("mse_loss: prediction and target lengths differ (" +
                     std::to_string(pred.size()) + " vs " + std::to_string(target.size()) + ")");
  }
  const double n = static_cast<double>(pred.size());
  LossValue out;
  out.grad.resize(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    out.value += d * d;
    out.grad[i] = 2.0 * d / n;
  }
  out.value /= n;
  return out;
}

GradientSet zeros_like(const std::vector<ParamBlock>& blocks) {
  GradientSet g;
  g.reserve(blocks.size());
  for (const auto& b : blocks) g.emplace_back(b.values.size(), 0.0);
  return g;
}

AdamState make_adam_state(const std::vector<ParamBlock>& blocks) {
  return AdamState{zeros_like(blocks), zeros_like(blocks), 0};
}

void adam_step(std::vector<ParamBlock>& params, const GradientSet& grads, AdamState& state,
               const TrainConfig& cfg) {
  if (grads.size() != params.size() || state.first.size() != params.size()) {
    throw ShapeError("adam_step: gradient/state block count does not match parameters");
  }
  for (std::size_t b = 0; b < params.size(); ++b) {
    if (grads[b].size() != params[b].values.size() ||
        state.first[b].size() != params[b].values.size()) {
      throw ShapeError("adam_step: block '" + std::string(params[b].name) + "' shape mismatch");
    }
  }
  ++state.step;
  if (cfg.optimizer == Optimizer::Sgd) {
    for (std::size_t b = 0; b < params.size(); ++b) {
      for (std::size_t i = 0; i < grads[b].size(); ++i) {
        params[b].values[i] -= cfg.learning_rate * grads[b][i];
      }
    }
    return;
  }
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.adam_beta1, t);
  const double c2 = 1.0 - std::pow(cfg.adam_beta2, t);
  for (std::size_t b = 0; b < params.size(); ++b) {
    auto& m = state.first[b];
    auto& v = state.second[b];
    auto values = params[b].values;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = grads[b][i];
      m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * g;
      v[i] = cfg.adam_beta2 * v[i] + (1.0 - cfg.adam_beta2) * g * g;
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      values[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
    }
  }
}

namespace {

void clip_global_norm(GradientSet& grads, double cap) {
  double sq = 0.0;
  for (const auto& g : grads) {
    for (double v : g) sq += v * v;
  }
  const double norm = std::sqrt(sq);
  if (norm <= cap || norm == 0.0) return;
  const double f = cap / norm;
  for (auto& g : grads) {
    for (double& v : g) v *= f;
  }
}

}  // namespace

ExperimentReport train_regression(Regressor& model, const TaskData& data, const std::string& task,
                                  const TrainConfig& cfg, const EpochHook& hook) {
  cfg.validate();
  if (model.input_dim() != data.train.x.cols()) {
    throw ShapeError("train_regression: model input dimension does not match task arity");
  }
  if (cfg.standardize_targets) {
    const Vec& y = data.train.y;
    const double n = static_cast<double>(y.size());
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double var = 0.0;
    for (double v : y) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / n);
    model.set_output_transform(mean, sd > 1e-12 ? sd : 1.0);
  }

  ExperimentReport report;
  report.model = model.name();
  report.task = task;
  report.seed = cfg.seed;
  report.parameter_count = model.parameter_count();
  report.min_test_rmse = std::numeric_limits<double>::infinity();

  auto params = model.blocks();
  AdamState state = make_adam_state(params);
  GradientSet grads;
  Rng shuffle_rng(cfg.seed ^ 0x5851f42d4c957f2dULL);
  std::vector<std::size_t> order(data.train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  auto record_test = [&](std::size_t epoch) {
    const double rmse = std::sqrt(model.loss(data.test));
    if (rmse < report.min_test_rmse) {
      report.min_test_rmse = rmse;
      report.min_test_epoch = epoch;
    }
    return rmse;
  };

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.test_rmse = epoch % cfg.eval_every == 0 ? record_test(epoch)
                                                : std::numeric_limits<double>::quiet_NaN();
    if (cfg.batch_size == 0 || cfg.batch_size >= order.size()) {
      rec.train_loss = model.loss_and_grad(data.train, grads);
      if (!std::isfinite(rec.train_loss)) throw TrainingError("training loss is not finite", epoch);
      if (cfg.grad_clip) clip_global_norm(grads, *cfg.grad_clip);
      adam_step(params, grads, state, cfg);
    } else {
      for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[shuffle_rng.next_u64() % i]);
      }
      double weighted = 0.0;
      for (std::size_t lo = 0; lo < order.size(); lo += cfg.batch_size) {
        const std::size_t hi = std::min(order.size(), lo + cfg.batch_size);
        const std::span<const std::size_t> rows(order.data() + lo, hi - lo);
        const double l = model.loss_and_grad(data.train, rows, grads);
        if (!std::isfinite(l)) throw TrainingError("training loss is not finite", epoch);
        weighted += l * static_cast<double>(hi - lo);
        if (cfg.grad_clip) clip_global_norm(grads, *cfg.grad_clip);
        adam_step(params, grads, state, cfg);
      }
      rec.train_loss = weighted / static_cast<double>(order.size());
    }
    report.curve.push_back(rec);
    if (hook) hook(epoch, model);
  }

  report.final_train_mse = model.loss(data.train);
  if (!std::isfinite(report.final_train_mse)) {
    throw TrainingError("training loss is not finite", cfg.epochs);
  }
  report.final_test_rmse = record_test(cfg.epochs);
  return report;
}

ExperimentReport train_regression(Regressor& model, const TaskSpec& task, const TrainConfig& cfg,
                                  const EpochHook& hook) {
  return train_regression(model, make_task_data(task, cfg.seed), task.name, cfg, hook);
}

// ---------------------------------------------------------------------------

namespace {

template <class Params, class Forward, class Backward>
GradientPair block_gradient_pair(const Params& params, const DenseMatrix& xs,
                                 const DenseMatrix& targets, double h, Forward forward,
                                 Backward backward) {
  if (xs.rows() != targets.rows()) throw ShapeError("gradient check: xs/targets row mismatch");
  const double scale = 1.0 / static_cast<double>(targets.rows() * targets.cols());

  auto loss_of = [&](const Params& p, const DenseMatrix& inputs) {
    double sum = 0.0;
    for (std::size_t s = 0; s < inputs.rows(); ++s) {
      const Vec y = forward(inputs.row(s), p).y;
      for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = y[i] - targets(s, i);
        sum += d * d;
      }
    }
    return sum * scale;
  };

  Params work = params;
  GradientPair pair;
  for (const auto& b : param_blocks(work)) pair.names.emplace_back(b.name);
  pair.names.emplace_back("x");
  pair.analytic = zeros_like(param_blocks(work));
  pair.analytic.emplace_back(xs.size(), 0.0);

  for (std::size_t s = 0; s < xs.rows(); ++s) {
    const auto f = forward(xs.row(s), params);
    Vec upstream(f.y.size());
    for (std::size_t i = 0; i < f.y.size(); ++i) upstream[i] = 2.0 * (f.y[i] - targets(s, i)) * scale;
    auto g = backward(upstream, f.cache, params);
    auto gb = param_blocks(g);
    for (std::size_t b = 0; b < gb.size(); ++b) {
      for (std::size_t i = 0; i < gb[b].values.size(); ++i) pair.analytic[b][i] += gb[b].values[i];
    }
    for (std::size_t i = 0; i < g.x.size(); ++i) pair.analytic.back()[s * xs.cols() + i] = g.x[i];
  }

  auto blocks = param_blocks(work);
  for (auto& b : blocks) {
    Vec numeric(b.values.size());
    for (std::size_t i = 0; i < b.values.size(); ++i) {
      const double saved = b.values[i];
      b.values[i] = saved + h;
      const double up = loss_of(work, xs);
      b.values[i] = saved - h;
      const double down = loss_of(work, xs);
      b.values[i] = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw NumericError("gradient check: non-finite loss in block " + std::string(b.name));
      }
      numeric[i] = (up - down) / (2.0 * h);
    }
    pair.numeric.push_back(std::move(numeric));
  }
  DenseMatrix inputs = xs;
  Vec numeric_x(xs.size());
  auto flat = inputs.values();
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const double saved = flat[i];
    flat[i] = saved + h;
    const double up = loss_of(work, inputs);
    flat[i] = saved - h;
    const double down = loss_of(work, inputs);
    flat[i] = saved;
    numeric_x[i] = (up - down) / (2.0 * h);
  }
  pair.numeric.push_back(std::move(numeric_x));
  return pair;
}

}  // namespace

GradientPair sgn_gradient_pair(const SgnParams& params, const DenseMatrix& xs,
                               const DenseMatrix& targets, double h) {
  return block_gradient_pair(
      params, xs, targets, h,
      [](std::span<const double> x, const SgnParams& p) { return sgn_forward(x, p); },
      [](const Vec& up, const SgnCache& c, const SgnParams& p) { return sgn_backward(up, c, p); });
}

GradientPair mlp_gradient_pair(const MlpParams& params, const DenseMatrix& xs,
                               const DenseMatrix& targets, double h) {
  return block_gradient_pair(
      params, xs, targets, h,
      [](std::span<const double> x, const MlpParams& p) { return mlp_forward(x, p); },
      [](const Vec& up, const MlpCache& c, const MlpParams& p) { return mlp_backward(up, c, p); });
}

GradientPair regressor_gradient_pair(Regressor& model, const Dataset& data, double h) {
  GradientPair pair;
  auto blocks = model.blocks();
  for (const auto& b : blocks) pair.names.emplace_back(b.name);
  model.loss_and_grad(data, pair.analytic, /*parallel=*/false);
  for (auto& b : blocks) {
    Vec numeric(b.values.size());
    for (std::size_t i = 0; i < b.values.size(); ++i) {
      const double saved = b.values[i];
      b.values[i] = saved + h;
      const double up = model.loss(data);
      b.values[i] = saved - h;
      const double down = model.loss(data);
      b.values[i] = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw NumericError("gradient check: non-finite loss in block " + std::string(b.name));
      }
      numeric[i] = (up - down) / (2.0 * h);
    }
    pair.numeric.push_back(std::move(numeric));
  }
  return pair;
}

GradCheckReport compare_gradients(const GradientPair& pair, double tolerance) {
  GradCheckReport r;
  r.tolerance = tolerance;
  for (std::size_t b = 0; b < pair.analytic.size(); ++b) {
    for (std::size_t i = 0; i < pair.analytic[b].size(); ++i) {
      const double a = pair.analytic[b][i];
      const double n = pair.numeric[b][i];
      const double denom = std::max({std::fabs(a), std::fabs(n), 1e-8});
      const double rel = std::fabs(a - n) / denom;
      ++r.coordinates;
      if (rel > r.max_rel_error || r.coordinates == 1) {
        r.max_rel_error = rel;
        r.worst_block = pair.names[b];
        r.worst_index = i;
        r.worst_analytic = a;
        r.worst_numeric = n;
      }
    }
  }
  r.passed = r.max_rel_error < tolerance;
  return r;
}

GradCheckReport gradient_check(const SgnParams& params, const DenseMatrix& xs,
                               const DenseMatrix& targets, double tolerance) {
  return compare_gradients(sgn_gradient_pair(params, xs, targets), tolerance);
}

GradCheckReport gradient_check(const MlpParams& params, const DenseMatrix& xs,
                               const DenseMatrix& targets, double tolerance) {
  return compare_gradients(mlp_gradient_pair(params, xs, targets), tolerance);
}

}  // namespace sgn
