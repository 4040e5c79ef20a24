#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sgn/blocks.hpp"
#include "sgn/layers.hpp"
#include "sgn/numkit.hpp"
#include "sgn/spline.hpp"
#include "sgn/task.hpp"

namespace sgn {

enum class Optimizer { Adam, Sgd };

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t epochs = 1000;
  std::size_t batch_size = 0;  // 0 = full batch
  Optimizer optimizer = Optimizer::Adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  std::optional<double> grad_clip;  // global L2 norm cap
  std::size_t eval_every = 1;       // test RMSE cadence in epochs
  bool standardize_targets = true;  // fit (y - mean) / std of the training targets

  // Throws ParameterError if the learning rate or betas are out of range.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Losses and optimizer.

struct LossValue {
  double value = 0.0;
  Vec grad;
};

LossValue mse_loss(std::span<const double> pred, std::span<const double> target);

// Gradients are stored one Vec per parameter block, in param_blocks() order.
using GradientSet = std::vector<Vec>;

GradientSet zeros_like(const std::vector<ParamBlock>& blocks);

struct AdamState {
  GradientSet first;
  GradientSet second;
  std::size_t step = 0;
};

AdamState make_adam_state(const std::vector<ParamBlock>& blocks);

// One bias-corrected Adam update (or plain SGD when cfg.optimizer is Sgd).
void adam_step(std::vector<ParamBlock>& params, const GradientSet& grads, AdamState& state,
               const TrainConfig& cfg);

// ---------------------------------------------------------------------------
// Scalar-output regression models behind one interface.

using Upstream = std::function<double(double)>;

// Sums per-sample parameter gradients for one model. One accumulator per
// worker; accumulators of the same model are merged in a fixed order.
class GradientAccumulator {
 public:
  virtual ~GradientAccumulator() = default;
  // Evaluates y = raw_predict(x), then adds upstream(y) * dy/dparams. Returns y.
  virtual double add(std::span<const double> x, const Upstream& upstream) = 0;
  // other must come from the same model.
  virtual void merge(const GradientAccumulator& other) = 0;
  // Writes the sums in param_blocks() order.
  virtual GradientSet gradients() const = 0;
};

class Regressor {
 public:
  virtual ~Regressor() = default;

  virtual std::string name() const = 0;
  virtual std::size_t input_dim() const = 0;
  virtual std::vector<ParamBlock> blocks() = 0;
  virtual std::unique_ptr<Regressor> clone() const = 0;
  // Network output before the fixed output transform.
  virtual double raw_predict(std::span<const double> x) const = 0;
  // Zeroed accumulator bound to this model's current parameters.
  virtual std::unique_ptr<GradientAccumulator> make_accumulator() const = 0;

  // shift + scale * raw_predict(x). The transform is not trained; the training
  // loop sets it from the training targets when standardization is on.
  double predict(std::span<const double> x) const {
    return output_shift_ + output_scale_ * raw_predict(x);
  }
  void set_output_transform(double shift, double scale) {
    output_shift_ = shift;
    output_scale_ = scale;
  }
  double output_shift() const { return output_shift_; }
  double output_scale() const { return output_scale_; }

  std::size_t parameter_count();
  Vec predict_all(const DenseMatrix& xs) const;

  // Mean squared error of predict() over the dataset and its gradient. The
  // parallel path splits samples into fixed chunks, so the result does not
  // depend on the thread count; the serial path sums samples strictly in order.
  double loss_and_grad(const Dataset& data, GradientSet& grads, bool parallel = true);
  double loss_and_grad(const Dataset& data, std::span<const std::size_t> rows, GradientSet& grads,
                       bool parallel = true);
  double loss(const Dataset& data) const;

 private:
  double output_shift_ = 0.0;
  double output_scale_ = 1.0;
};

class SgnRegressor final : public Regressor {
 public:
  SgnRegressor(SgnParams params, std::string label = "SGN");
  std::string name() const override { return label_; }
  std::size_t input_dim() const override { return params_.d_in(); }
  std::vector<ParamBlock> blocks() override { return param_blocks(params_); }
  std::unique_ptr<Regressor> clone() const override;
  double raw_predict(std::span<const double> x) const override;
  std::unique_ptr<GradientAccumulator> make_accumulator() const override;
  const SgnParams& params() const { return params_; }
  SgnParams& params() { return params_; }

 private:
  SgnParams params_;
  std::string label_;
};

class MlpRegressor final : public Regressor {
 public:
  MlpRegressor(MlpParams params, std::string label);
  std::string name() const override { return label_; }
  std::size_t input_dim() const override { return params_.d_in(); }
  std::vector<ParamBlock> blocks() override { return param_blocks(params_); }
  std::unique_ptr<Regressor> clone() const override;
  double raw_predict(std::span<const double> x) const override;
  std::unique_ptr<GradientAccumulator> make_accumulator() const override;
  const MlpParams& params() const { return params_; }

 private:
  MlpParams params_;
  std::string label_;
};

// Two spline layers [d_in -> hidden -> 1]. Inputs are mapped affinely from the
// box [lo, hi] onto the spline grid domain [-1, 1] before the first layer.
class KanRegressor final : public Regressor {
 public:
  KanRegressor(SplineLayerParams first, SplineLayerParams second, Vec lo, Vec hi);
  std::string name() const override { return "KAN"; }
  std::size_t input_dim() const override { return first_.d_in(); }
  std::vector<ParamBlock> blocks() override;
  std::unique_ptr<Regressor> clone() const override;
  double raw_predict(std::span<const double> x) const override;
  std::unique_ptr<GradientAccumulator> make_accumulator() const override;

  // x mapped affinely from [lo, hi] onto [-1, 1] per coordinate.
  Vec normalize(std::span<const double> x) const;
  const SplineLayerParams& first() const { return first_; }
  const SplineLayerParams& second() const { return second_; }

 private:
  SplineLayerParams first_;
  SplineLayerParams second_;
  Vec lo_;
  Vec hi_;
};

// ---------------------------------------------------------------------------
// Training loop.

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // MSE in original target units, before this epoch's update
  double test_rmse = 0.0;   // NaN on epochs skipped by eval_every
};

struct ExperimentReport {
  std::string model;
  std::string task;
  std::uint64_t seed = 0;
  std::size_t parameter_count = 0;
  std::vector<EpochRecord> curve;
  double final_train_mse = 0.0;
  double final_test_rmse = 0.0;
  double min_test_rmse = 0.0;
  std::size_t min_test_epoch = 0;  // == epochs for the post-training evaluation
};

// Called after each epoch's update with the epoch index (0-based) and the model.
using EpochHook = std::function<void(std::size_t epoch, const Regressor& model)>;

// Full-batch (or mini-batch when cfg.batch_size > 0) training on the given data.
// Throws TrainingError carrying the epoch on a non-finite loss.
ExperimentReport train_regression(Regressor& model, const TaskData& data, const std::string& task,
                                  const TrainConfig& cfg, const EpochHook& hook = {});
ExperimentReport train_regression(Regressor& model, const TaskSpec& task, const TrainConfig& cfg,
                                  const EpochHook& hook = {});

// ---------------------------------------------------------------------------
// Gradient checking.

struct GradientPair {
  std::vector<std::string> names;
  GradientSet analytic;
  GradientSet numeric;
};

struct GradCheckReport {
  bool passed = false;
  double tolerance = 0.0;
  double max_rel_error = 0.0;
  std::string worst_block;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coordinates = 0;
};

// Loss: mean over samples and outputs of (y - target)^2. Rows of xs / targets
// are samples. The input gradient is included as a block named "x".
GradientPair sgn_gradient_pair(const SgnParams& params, const DenseMatrix& xs,
                               const DenseMatrix& targets, double h = 1e-5);
GradientPair mlp_gradient_pair(const MlpParams& params, const DenseMatrix& xs,
                               const DenseMatrix& targets, double h = 1e-5);
GradientPair regressor_gradient_pair(Regressor& model, const Dataset& data, double h = 1e-5);

// Relative error |a - n| / max(|a|, |n|, 1e-8), maximised over all coordinates.
GradCheckReport compare_gradients(const GradientPair& pair, double tolerance);

GradCheckReport gradient_check(const SgnParams& params, const DenseMatrix& xs,
                               const DenseMatrix& targets, double tolerance);
GradCheckReport gradient_check(const MlpParams& params, const DenseMatrix& xs,
                               const DenseMatrix& targets, double tolerance);

}  // namespace sgn
