#include <cmath>
#include <numeric>

#include "sgn/errors.hpp"
#include "sgn/kernels.hpp"
#include "sgn/training.hpp"

namespace sgn {
namespace {

template <class Grads>
GradientSet flatten(Grads g) {
  GradientSet out;
  for (const auto& b : param_blocks(g)) out.emplace_back(b.values.begin(), b.values.end());
  return out;
}

template <class Grads>
void add_grads(Grads& into, const Grads& from) {
  auto dst = param_blocks(into);
  auto src = param_blocks(const_cast<Grads&>(from));  // read only
  for (std::size_t b = 0; b < dst.size(); ++b) {
    for (std::size_t i = 0; i < dst[b].values.size(); ++i) dst[b].values[i] += src[b].values[i];
  }
}

class SgnAccumulator final : public GradientAccumulator {
 public:
  explicit SgnAccumulator(const SgnParams& p) : p_(p), acc_(zero_grads(p)) {}
  double add(std::span<const double> x, const Upstream& upstream) override {
    const SgnForward f = sgn_forward(x, p_);
    const double g = upstream(f.y[0]);
    sgn_backward_accumulate(std::span<const double>(&g, 1), f.cache, p_, acc_);
    return f.y[0];
  }
  void merge(const GradientAccumulator& other) override {
    add_grads(acc_, static_cast<const SgnAccumulator&>(other).acc_);
  }
  GradientSet gradients() const override { return flatten(acc_); }

 private:
  const SgnParams& p_;
  SgnGrads acc_;
};

class MlpAccumulator final : public GradientAccumulator {
 public:
  explicit MlpAccumulator(const MlpParams& p) : p_(p), acc_(zero_grads(p)) {}
  double add(std::span<const double> x, const Upstream& upstream) override {
    const MlpForward f = mlp_forward(x, p_);
    const double g = upstream(f.y[0]);
    mlp_backward_accumulate(std::span<const double>(&g, 1), f.cache, p_, acc_);
    return f.y[0];
  }
  void merge(const GradientAccumulator& other) override {
    add_grads(acc_, static_cast<const MlpAccumulator&>(other).acc_);
  }
  GradientSet gradients() const override { return flatten(acc_); }

 private:
  const MlpParams& p_;
  MlpGrads acc_;
};

class KanAccumulator final : public GradientAccumulator {
 public:
  explicit KanAccumulator(const KanRegressor& model)
      : model_(model), first_(zero_grads(model.first())), second_(zero_grads(model.second())) {}
  double add(std::span<const double> x, const Upstream& upstream) override {
    SplineCache c1;
    SplineCache c2;
    const Vec h = spline_layer_forward(model_.normalize(x), model_.first(), &c1);
    const double y = spline_layer_forward(h, model_.second(), &c2)[0];
    const double g = upstream(y);
    SplineLayerGrads g2 = spline_layer_backward(std::span<const double>(&g, 1), c2, model_.second());
    SplineLayerGrads g1 = spline_layer_backward(g2.x, c1, model_.first());
    add_grads(second_, g2);
    add_grads(first_, g1);
    return y;
  }
  void merge(const GradientAccumulator& other) override {
    const auto& o = static_cast<const KanAccumulator&>(other);
    add_grads(first_, o.first_);
    add_grads(second_, o.second_);
  }
  GradientSet gradients() const override {
    GradientSet a = flatten(first_);
    GradientSet b = flatten(second_);
    a.insert(a.end(), std::make_move_iterator(b.begin()), std::make_move_iterator(b.end()));
    return a;
  }

 private:
  const KanRegressor& model_;
  SplineLayerGrads first_;
  SplineLayerGrads second_;
};

}  // namespace

std::size_t Regressor::parameter_count() { return count_parameters(blocks()); }

Vec Regressor::predict_all(const DenseMatrix& xs) const {
  Vec out(xs.rows());
  kernels::for_each_parallel(xs.rows(), [&](std::size_t i) { out[i] = predict(xs.row(i)); });
  return out;
}

double Regressor::loss_and_grad(const Dataset& data, GradientSet& grads, bool parallel) {
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return loss_and_grad(data, rows, grads, parallel);
}

double Regressor::loss_and_grad(const Dataset& data, std::span<const std::size_t> rows,
                                GradientSet& grads, bool parallel) {
  struct Partial {
    double loss = 0.0;
    std::unique_ptr<GradientAccumulator> acc;
  };
  const double n = static_cast<double>(rows.size());
  const double shift = output_shift();
  const double scale = output_scale();

  auto init = [&] { return Partial{0.0, make_accumulator()}; };
  auto body = [&](Partial& p, std::size_t k) {
    const std::size_t i = rows[k];
    const double target = data.y[i];
    double residual = 0.0;
    p.acc->add(data.x.row(i), [&](double raw) {
      residual = shift + scale * raw - target;
      return 2.0 * residual * scale / n;
    });
    p.loss += residual * residual;
  };
  auto merge = [](Partial& into, const Partial& from) {
    into.loss += from.loss;
    into.acc->merge(*from.acc);
  };

  Partial total = parallel
                      ? kernels::reduce_parallel<Partial>(rows.size(), init, body, merge)
                      : kernels::reduce_serial<Partial>(rows.size(), init, body, merge);
  grads = total.acc->gradients();
  return total.loss / n;
}

double Regressor::loss(const Dataset& data) const {
  struct Partial {
    double sum = 0.0;
  };
  const Partial total = kernels::reduce_parallel<Partial>(
      data.size(), [] { return Partial{}; },
      [&](Partial& p, std::size_t i) {
        const double r = predict(data.x.row(i)) - data.y[i];
        p.sum += r * r;
      },
      [](Partial& into, const Partial& from) { into.sum += from.sum; });
  return total.sum / static_cast<double>(data.size());
}

// ---------------------------------------------------------------------------

SgnRegressor::SgnRegressor(SgnParams params, std::string label)
    : params_(std::move(params)), label_(std::move(label)) {
  if (params_.d_out() != 1) throw ShapeError("SgnRegressor: output dimension must be 1");
}

std::unique_ptr<Regressor> SgnRegressor::clone() const {
  return std::make_unique<SgnRegressor>(*this);
}

double SgnRegressor::raw_predict(std::span<const double> x) const {
  return sgn_forward(x, params_).y[0];
}

std::unique_ptr<GradientAccumulator> SgnRegressor::make_accumulator() const {
  return std::make_unique<SgnAccumulator>(params_);
}

MlpRegressor::MlpRegressor(MlpParams params, std::string label)
    : params_(std::move(params)), label_(std::move(label)) {
  if (params_.d_out() != 1) throw ShapeError("MlpRegressor: output dimension must be 1");
}

std::unique_ptr<Regressor> MlpRegressor::clone() const {
  return std::make_unique<MlpRegressor>(*this);
}

double MlpRegressor::raw_predict(std::span<const double> x) const {
  return mlp_forward(x, params_).y[0];
}

std::unique_ptr<GradientAccumulator> MlpRegressor::make_accumulator() const {
  return std::make_unique<MlpAccumulator>(params_);
}

KanRegressor::KanRegressor(SplineLayerParams first, SplineLayerParams second, Vec lo, Vec hi)
    : first_(std::move(first)), second_(std::move(second)), lo_(std::move(lo)), hi_(std::move(hi)) {
  if (first_.d_out() != second_.d_in() || second_.d_out() != 1) {
    throw ShapeError("KanRegressor: layer shapes do not chain to a scalar output");
  }
  if (lo_.size() != first_.d_in() || hi_.size() != first_.d_in()) {
    throw ShapeError("KanRegressor: normalization box does not match input dimension");
  }
}

std::vector<ParamBlock> KanRegressor::blocks() {
  auto a = param_blocks(first_);
  auto b = param_blocks(second_);
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::unique_ptr<Regressor> KanRegressor::clone() const {
  return std::make_unique<KanRegressor>(*this);
}

Vec KanRegressor::normalize(std::span<const double> x) const {
  Vec z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    z[i] = 2.0 * (x[i] - lo_[i]) / (hi_[i] - lo_[i]) - 1.0;
  }
  return z;
}

double KanRegressor::raw_predict(std::span<const double> x) const {
  const Vec h = spline_layer_forward(normalize(x), first_);
  return spline_layer_forward(h, second_)[0];
}

std::unique_ptr<GradientAccumulator> KanRegressor::make_accumulator() const {
  return std::make_unique<KanAccumulator>(*this);
}

}  // namespace sgn
