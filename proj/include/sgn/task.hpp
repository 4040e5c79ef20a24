#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sgn/numkit.hpp"

namespace sgn {

// Axis-aligned box, one [lo, hi] per input dimension.
struct Box {
  Vec lo;
  Vec hi;
  double volume() const;
};

// A domain is a union of disjoint boxes, e.g. [-2,-1] u [1,2].
using Domain = std::vector<Box>;

Domain cube(std::size_t arity, double lo, double hi);

enum class Sampling { UniformGrid, UniformRandom };

using TargetFn = std::function<double(std::span<const double>)>;

struct TaskSpec {
  std::string name;
  std::size_t arity = 1;
  TargetFn target;
  Domain train_domain;
  Domain test_domain;
  std::size_t n_train = 1000;
  std::size_t n_test = 1000;
  Sampling sampling = Sampling::UniformRandom;
};

struct Dataset {
  DenseMatrix x;  // n x arity
  Vec y;          // n
  std::size_t size() const noexcept { return y.size(); }
};

// UniformGrid places round(n_box^(1/arity)) points per axis in each box (so the
// count can differ slightly from n); UniformRandom draws box by volume, then
// coordinates uniformly. Throws ParameterError on a degenerate domain and
// NumericError if the target is not finite at a sample.
Dataset sample_dataset(const TaskSpec& task, const Domain& domain, std::size_t n,
                       Sampling sampling, Rng& rng);

struct TaskData {
  Dataset train;
  Dataset test;
};

// Train and test sets drawn from independent streams derived from the seed.
// The test set is always sampled uniformly at random.
TaskData make_task_data(const TaskSpec& task, std::uint64_t seed);

}  // namespace sgn
