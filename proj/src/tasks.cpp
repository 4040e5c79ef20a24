#include <cmath>
#include <numeric>
#include <string>

#include "sgn/errors.hpp"
#include "sgn/task.hpp"

namespace sgn {

double Box::volume() const {
  double v = 1.0;
  for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
  return v;
}

Domain cube(std::size_t arity, double lo, double hi) {
  return {Box{Vec(arity, lo), Vec(arity, hi)}};
}

namespace {

void check_domain(const Domain& domain, std::size_t arity) {
  if (domain.empty()) throw ParameterError("task domain has no boxes");
  for (const auto& b : domain) {
    if (b.lo.size() != arity || b.hi.size() != arity) {
      throw ParameterError("task domain box does not match arity " + std::to_string(arity));
    }
    for (std::size_t i = 0; i < arity; ++i) {
      if (!(b.lo[i] < b.hi[i])) throw ParameterError("task domain box is degenerate");
    }
  }
}

// Splits n over the boxes in proportion to volume; the last box takes the rest.
std::vector<std::size_t> allocate(const Domain& domain, std::size_t n) {
  double total = 0.0;
  for (const auto& b : domain) total += b.volume();
  std::vector<std::size_t> counts(domain.size());
  std::size_t used = 0;
  for (std::size_t i = 0; i + 1 < domain.size(); ++i) {
    counts[i] = static_cast<std::size_t>(std::llround(n * domain[i].volume() / total));
    used += counts[i];
  }
  counts.back() = n > used ? n - used : 0;
  return counts;
}

}  // namespace

Dataset sample_dataset(const TaskSpec& task, const Domain& domain, std::size_t n,
                       Sampling sampling, Rng& rng) {
  const std::size_t arity = task.arity;
  if (arity == 0) throw ParameterError("task arity must be positive");
  if (n == 0) throw ParameterError("sample count must be positive");
  check_domain(domain, arity);

  std::vector<Vec> points;
  const auto counts = allocate(domain, n);
  for (std::size_t b = 0; b < domain.size(); ++b) {
    const Box& box = domain[b];
    if (sampling == Sampling::UniformRandom) {
      for (std::size_t s = 0; s < counts[b]; ++s) {
        Vec p(arity);
        for (std::size_t i = 0; i < arity; ++i) p[i] = rng.uniform(box.lo[i], box.hi[i]);
        points.push_back(std::move(p));
      }
      continue;
    }
    const auto per_axis = static_cast<std::size_t>(
        std::max(1.0, std::round(std::pow(static_cast<double>(counts[b]), 1.0 / arity))));
    std::size_t total = 1;
    for (std::size_t i = 0; i < arity; ++i) total *= per_axis;
    for (std::size_t flat = 0; flat < total; ++flat) {
      Vec p(arity);
      std::size_t rest = flat;
      for (std::size_t i = arity; i-- > 0;) {
        const std::size_t k = rest % per_axis;
        rest /= per_axis;
        p[i] = per_axis == 1 ? 0.5 * (box.lo[i] + box.hi[i])
                             : box.lo[i] + (box.hi[i] - box.lo[i]) * k / (per_axis - 1);
      }
      points.push_back(std::move(p));
    }
  }

  Dataset out{DenseMatrix(points.size(), arity), Vec(points.size())};
  for (std::size_t s = 0; s < points.size(); ++s) {
    std::copy(points[s].begin(), points[s].end(), out.x.row(s).begin());
    const double y = task.target(points[s]);
    if (!std::isfinite(y)) {
      throw NumericError("task '" + task.name + "' target is not finite at sample " +
                         std::to_string(s));
    }
    out.y[s] = y;
  }
  return out;
}

TaskData make_task_data(const TaskSpec& task, std::uint64_t seed) {
  Rng root(seed);
  Rng train_rng(root.next_u64());
  Rng test_rng(root.next_u64());
  return {sample_dataset(task, task.train_domain, task.n_train, task.sampling, train_rng),
          sample_dataset(task, task.test_domain, task.n_test, Sampling::UniformRandom, test_rng)};
}

}  // namespace sgn
