#include <gtest/gtest.h>

#include <cmath>

#include "sgn/bench.hpp"
#include "sgn/errors.hpp"
#include "sgn/training.hpp"

using namespace sgn;

TEST(MseLoss, ValueAndGradient) {
  const LossValue l = mse_loss(Vec{1.0, 2.0}, Vec{0.0, 4.0});
  EXPECT_DOUBLE_EQ(l.value, (1.0 + 4.0) / 2.0);
  EXPECT_DOUBLE_EQ(l.grad[0], 1.0);
  EXPECT_DOUBLE_EQ(l.grad[1], -2.0);
  EXPECT_THROW(mse_loss(Vec{1.0}, Vec{1.0, 2.0}), ShapeError);
}

TEST(Adam, FirstStepIsSignedLearningRate) {
  Vec w{1.0, -2.0, 0.5};
  std::vector<ParamBlock> blocks{{"w", w, 3, 1}};
  AdamState state = make_adam_state(blocks);
  TrainConfig cfg;
  cfg.learning_rate = 1e-3;
  adam_step(blocks, GradientSet{{0.3, -4.0, 1e-3}}, state, cfg);
  EXPECT_NEAR(w[0], 1.0 - 1e-3, 1e-10);
  EXPECT_NEAR(w[1], -2.0 + 1e-3, 1e-10);
  EXPECT_NEAR(w[2], 0.5 - 1e-3, 1e-8);
}

TEST(Adam, ZeroGradientLeavesParameters) {
  Vec w{1.0, -2.0};
  std::vector<ParamBlock> blocks{{"w", w, 2, 1}};
  AdamState state = make_adam_state(blocks);
  TrainConfig cfg;
  for (int i = 0; i < 100; ++i) adam_step(blocks, GradientSet{{0.0, 0.0}}, state, cfg);
  EXPECT_EQ(w, (Vec{1.0, -2.0}));
}

TEST(Adam, ShapeMismatchThrows) {
  Vec w{1.0};
  std::vector<ParamBlock> blocks{{"w", w, 1, 1}};
  AdamState state = make_adam_state(blocks);
  EXPECT_THROW(adam_step(blocks, GradientSet{{1.0, 2.0}}, state, TrainConfig{}), ShapeError);
}

TEST(TrainConfig, Validation) {
  TrainConfig cfg;
  cfg.learning_rate = -1.0;
  EXPECT_THROW(cfg.validate(), ParameterError);
  cfg.learning_rate = 1e-3;
  cfg.adam_beta1 = 1.0;
  EXPECT_THROW(cfg.validate(), ParameterError);
}

TEST(Adam, TrajectoryIsDeterministic) {
  const TaskSpec task = find_task("rational");
  const TaskData data = make_task_data(task, 3);
  auto run = [&] {
    auto model = make_regressor(model_spec(ModelFamily::Sgn, 8, 4), task, 3);
    auto blocks = model->blocks();
    AdamState state = make_adam_state(blocks);
    GradientSet g;
    for (int i = 0; i < 100; ++i) {
      model->loss_and_grad(data.train, g);
      adam_step(blocks, g, state, TrainConfig{});
    }
    std::vector<double> flat;
    for (const auto& b : model->blocks()) flat.insert(flat.end(), b.values.begin(), b.values.end());
    return flat;
  };
  EXPECT_EQ(run(), run());
}

TEST(Training, LossDecreasesOnSmoothTask) {
  const TaskSpec task = find_task("simple-product");
  auto model = make_regressor(model_spec(ModelFamily::MlpGelu, 8), task, 0);
  TrainConfig cfg;
  cfg.epochs = 51;
  const ExperimentReport r = train_regression(*model, task, cfg);
  ASSERT_EQ(r.curve.size(), 51u);
  EXPECT_LT(r.curve[50].train_loss, r.curve[0].train_loss);
}

TEST(Training, ReportIsDeterministic) {
  const TaskSpec task = find_task("bessel");
  TrainConfig cfg;
  cfg.epochs = 20;
  auto a = make_regressor(model_spec(ModelFamily::Sgn, 8, 4), task, 1);
  auto b = make_regressor(model_spec(ModelFamily::Sgn, 8, 4), task, 1);
  const auto ra = train_regression(*a, task, cfg), rb = train_regression(*b, task, cfg);
  EXPECT_EQ(ra.final_test_rmse, rb.final_test_rmse);
  EXPECT_EQ(ra.curve.back().train_loss, rb.curve.back().train_loss);
}

TEST(Training, MiniBatchRuns) {
  const TaskSpec task = find_task("bessel");
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 64;
  auto m = make_regressor(model_spec(ModelFamily::MlpGelu, 8), task, 1);
  const auto r = train_regression(*m, task, cfg);
  EXPECT_TRUE(std::isfinite(r.final_test_rmse));
}

TEST(Training, EvalEveryLeavesGaps) {
  const TaskSpec task = find_task("bessel");
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.eval_every = 5;
  auto m = make_regressor(model_spec(ModelFamily::MlpGelu, 4), task, 1);
  const auto r = train_regression(*m, task, cfg);
  EXPECT_FALSE(std::isnan(r.curve[0].test_rmse));
  EXPECT_TRUE(std::isnan(r.curve[1].test_rmse));
  EXPECT_FALSE(std::isnan(r.curve[5].test_rmse));
}

TEST(Training, DivergenceCarriesEpoch) {
  const TaskSpec task = find_task("bessel");
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.learning_rate = 1e300;
  cfg.standardize_targets = false;
  auto m = make_regressor(model_spec(ModelFamily::MlpGelu, 4), task, 1);
  try {
    train_regression(*m, task, cfg);
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    EXPECT_GE(e.epoch(), 1u);
    EXPECT_LT(e.epoch(), 50u);
  }
}

TEST(Regressors, GradientsMatchFiniteDifferences) {
  const TaskSpec task = find_task("chaotic");
  TaskData data = make_task_data(task, 2);
  Dataset small{DenseMatrix(5, 2), Vec(5)};
  for (std::size_t i = 0; i < 5; ++i) {
    small.x(i, 0) = data.train.x(i, 0);
    small.x(i, 1) = data.train.x(i, 1);
    small.y[i] = data.train.y[i];
  }
  for (auto family : {ModelFamily::Sgn, ModelFamily::SgnPure, ModelFamily::MlpGelu, ModelFamily::Kan}) {
    auto m = make_regressor(model_spec(family, 3, 2), task, 2);
    m->set_output_transform(0.3, 1.7);
    const auto pair = regressor_gradient_pair(*m, small);
    const auto r = compare_gradients(pair, 1e-5);
    EXPECT_TRUE(r.passed) << to_string(family) << " " << r.worst_block << " " << r.max_rel_error;
  }
}

TEST(Regressors, CloneIsIndependent) {
  const TaskSpec task = find_task("bessel");
  auto m = make_regressor(model_spec(ModelFamily::Sgn, 4, 2), task, 0);
  auto c = m->clone();
  const Vec x{0.3};
  EXPECT_EQ(m->predict(x), c->predict(x));
  c->blocks()[0].values[0] += 1.0;
  EXPECT_NE(m->predict(x), c->predict(x));
}
