#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "sgn/activations.hpp"
#include "sgn/bench.hpp"
#include "sgn/checkpoint.hpp"
#include "sgn/complexity.hpp"
#include "sgn/errors.hpp"
#include "sgn/layers.hpp"
#include "sgn/report.hpp"
#include "sgn/rff.hpp"
#include "sgn/training.hpp"

namespace sgn::cli {
namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Options that can come from flags or from the JSON config file. Flags win.

class Params {
 public:
  template <class T>
  CLI::Option* add(CLI::App* app, const std::string& flag, T& var, const std::string& help) {
    CLI::Option* opt = app->add_option("--" + flag, var, help)->capture_default_str();
    if constexpr (is_vector<T>::value) opt->delimiter(',');
    std::string key = flag;
    std::replace(key.begin(), key.end(), '-', '_');
    entries_.push_back({key, opt, [&var, key](const json& j) { var = convert<T>(j, key); },
                        [&var] { return json(var); }});
    return opt;
  }

  void apply_config(const json& config) {
    if (!config.is_object()) throw UsageError("config file must hold a JSON object");
    for (const auto& [key, value] : config.items()) {
      auto it = std::find_if(entries_.begin(), entries_.end(),
                             [&](const Entry& e) { return e.key == key; });
      if (it == entries_.end()) throw UsageError("unknown config key '" + key + "'");
      if (key == "config") throw UsageError("config key 'config' is not allowed in a config file");
      if (it->opt->count() == 0) it->from_json(value);
    }
  }

  json echo() const {
    json j = json::object();
    for (const auto& e : entries_) {
      if (e.key != "config" && e.key != "out") j[e.key] = e.to_json();
    }
    return j;
  }

 private:
  template <class T>
  struct is_vector : std::false_type {};
  template <class T>
  struct is_vector<std::vector<T>> : std::true_type {};

  template <class T>
  static T convert(const json& j, const std::string& key) {
    auto bad = [&] { return UsageError("config key '" + key + "' has the wrong type"); };
    if constexpr (is_vector<T>::value) {
      if (!j.is_array()) throw bad();
      T out;
      for (const auto& item : j) out.push_back(convert<typename T::value_type>(item, key));
      return out;
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!j.is_string()) throw bad();
      return j.get<std::string>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!j.is_number()) throw bad();
      return j.get<T>();
    } else {
      if (!j.is_number_unsigned()) throw bad();
      return j.get<T>();
    }
  }

  struct Entry {
    std::string key;
    CLI::Option* opt;
    std::function<void(const json&)> from_json;
    std::function<json()> to_json;
  };
  std::vector<Entry> entries_;
};

// Files produced by a run, held in memory until the run succeeds.
struct Output {
  std::string format = "csv";
  std::vector<std::pair<std::string, std::string>> files;
  json checks = json::object();
  std::ostringstream log;

  void table(const std::string& stem, const Table& t) {
    if (format == "json") {
      files.emplace_back(stem + ".json", dump_json(t.to_json()));
    } else {
      files.emplace_back(stem + ".csv", t.to_csv());
    }
  }
  void json_file(const std::string& name, const json& j) { files.emplace_back(name, dump_json(j)); }
  void check(const std::string& name, bool ok) { checks[name] = ok; }
  bool passed() const {
    for (const auto& [k, v] : checks.items()) {
      if (!v.get<bool>()) return false;
    }
    return true;
  }
};

struct Common {
  std::uint64_t seed = 0;
  std::string out = "out";
  std::string format = "csv";
  std::string config;
};

void add_common(CLI::App* app, Params& params, Common& c) {
  params.add(app, "seed", c.seed, "Random seed");
  params.add(app, "out", c.out, "Output directory");
  params.add(app, "format", c.format, "Table format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  params.add(app, "config", c.config, "JSON file with option values (flags take precedence)");
}

std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t count) {
  std::vector<std::uint64_t> s(count);
  for (std::size_t i = 0; i < count; ++i) s[i] = first + i;
  return s;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

double norm_of(std::initializer_list<std::span<const double>> parts) {
  double sq = 0.0;
  for (auto part : parts) {
    for (double v : part) sq += v * v;
  }
  return std::sqrt(sq);
}

double diff_norm(std::initializer_list<std::pair<std::span<const double>, std::span<const double>>> parts) {
  double sq = 0.0;
  for (const auto& [a, b] : parts) {
    for (std::size_t i = 0; i < a.size(); ++i) sq += (a[i] - b[i]) * (a[i] - b[i]);
  }
  return std::sqrt(sq);
}

DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  DenseMatrix m(rows, cols);
  for (double& v : m.values()) v = rng.gaussian(0.0, 1.0);
  return m;
}

// ---------------------------------------------------------------------------
// gradcheck

struct GradcheckCmd {
  std::size_t instances = 20;
  std::size_t d_model = 4;
  std::size_t d_ff = 6;
  std::size_t m = 3;
  std::size_t batch = 3;
  double tolerance = 1e-5;

  void declare(CLI::App* app, Params& p) {
    p.add(app, "instances", instances, "Number of random blocks");
    p.add(app, "d-model", d_model, "Largest d_model drawn");
    p.add(app, "d-ff", d_ff, "Largest d_ff drawn");
    p.add(app, "m", m, "Largest spectral budget drawn");
    p.add(app, "batch", batch, "Samples per block");
    p.add(app, "tolerance", tolerance, "Max relative error allowed");
  }

  void run(const Common& c, Output& out) const {
    require(instances > 0 && d_model > 0 && d_ff > 0 && m > 0 && batch > 0,
            "gradcheck sizes must be positive");
    Rng rng(c.seed);
    const SpectralBranch branches[] = {SpectralBranch::Gated, SpectralBranch::Ungated,
                                       SpectralBranch::FixedGate, SpectralBranch::PureSpectral};
    Table t({"instance", "d_model", "d_ff", "m", "branch", "coordinates", "max_rel_error",
             "worst_block", "worst_index"});
    double worst = 0.0;
    for (std::size_t i = 0; i < instances; ++i) {
      const std::size_t dm = 1 + rng.next_u64() % d_model;
      const std::size_t df = 1 + rng.next_u64() % d_ff;
      const std::size_t mm = 1 + rng.next_u64() % m;
      InitConfig init;
      init.eps = 1.0;
      init.gate_bias = 0.0;
      SgnParams p = homotopy_init(dm, df, mm, init, rng);
      p.branch = branches[i % 4];
      for (double& v : p.wg) v = rng.gaussian(0.0, 1.0);
      for (double& v : p.ln_gamma) v = 1.0 + 0.3 * rng.gaussian(0.0, 1.0);
      for (double& v : p.ln_beta) v = 0.3 * rng.gaussian(0.0, 1.0);
      for (double& v : p.b1) v = 0.3 * rng.gaussian(0.0, 1.0);
      for (double& v : p.b2) v = 0.3 * rng.gaussian(0.0, 1.0);
      const DenseMatrix xs = gaussian_matrix(batch, dm, rng);
      const DenseMatrix ts = gaussian_matrix(batch, dm, rng);
      const GradCheckReport r = gradient_check(p, xs, ts, tolerance);
      worst = std::max(worst, r.max_rel_error);
      const char* names[] = {"gated", "ungated", "fixed", "pure"};
      t.add_row({cell(i), cell(dm), cell(df), cell(mm), std::string(names[i % 4]),
                 cell(r.coordinates), r.max_rel_error, r.worst_block, cell(r.worst_index)});
    }
    out.table("gradcheck", t);
    out.json_file("gradcheck_summary.json",
                  {{"instances", instances}, {"tolerance", tolerance}, {"max_rel_error", worst}});
    out.check("max_rel_error_below_tolerance", worst < tolerance);
    out.log << "max relative error " << format_double(worst) << " over " << instances
            << " blocks (tolerance " << format_double(tolerance) << ")\n";
  }
};

// ---------------------------------------------------------------------------
// homotopy

struct HomotopyCmd {
  std::size_t instances = 20;
  std::size_t inputs = 100;
  std::size_t d_model = 4;
  std::size_t d_ff = 6;
  std::size_t m = 3;
  double eps = 1e-2;
  double sigma = 1.64;
  double gate_bias = -4.0;

  void declare(CLI::App* app, Params& p) {
    p.add(app, "instances", instances, "Random blocks for the gradient scaling checks");
    p.add(app, "inputs", inputs, "Random inputs for the value identity check");
    p.add(app, "d-model", d_model, "Block input/output width");
    p.add(app, "d-ff", d_ff, "Hidden width");
    p.add(app, "m", m, "Spectral budget");
    p.add(app, "eps", eps, "Spectral init scale for the scaling checks");
    p.add(app, "sigma", sigma, "RFF bandwidth");
    p.add(app, "gate-bias", gate_bias, "Initial gate bias");
  }

  static SgnGrads batch_grads(const SgnParams& p, const DenseMatrix& xs, const DenseMatrix& ts) {
    SgnGrads g = zero_grads(p);
    const double scale = 1.0 / static_cast<double>(ts.size());
    for (std::size_t s = 0; s < xs.rows(); ++s) {
      const SgnForward f = sgn_forward(xs.row(s), p);
      Vec up(f.y.size());
      for (std::size_t i = 0; i < up.size(); ++i) up[i] = 2.0 * (f.y[i] - ts(s, i)) * scale;
      sgn_backward_accumulate(up, f.cache, p, g);
    }
    return g;
  }

  static MlpGrads batch_grads(const MlpParams& p, const DenseMatrix& xs, const DenseMatrix& ts) {
    MlpGrads g = zero_grads(p);
    const double scale = 1.0 / static_cast<double>(ts.size());
    for (std::size_t s = 0; s < xs.rows(); ++s) {
      const MlpForward f = mlp_forward(xs.row(s), p);
      Vec up(f.y.size());
      for (std::size_t i = 0; i < up.size(); ++i) up[i] = 2.0 * (f.y[i] - ts(s, i)) * scale;
      mlp_backward_accumulate(up, f.cache, p, g);
    }
    return g;
  }

  void run(const Common& c, Output& out) const {
    require(instances > 0 && inputs > 0 && d_model > 0 && d_ff > 0 && m > 0,
            "homotopy sizes must be positive");
    require(eps > 0.0, "--eps must be positive for the scaling checks");
    require(sigma > 0.0, "--sigma must be positive");
    Rng rng(c.seed);
    InitConfig init;
    init.sigma = sigma;
    init.gate_bias = gate_bias;
    init.seed = c.seed;

    // Value identity at eps = 0.
    InitConfig zero = init;
    zero.eps = 0.0;
    const SgnParams p0 = homotopy_init(d_model, d_ff, m, zero, rng);
    const MlpParams base = base_mlp(p0);
    std::size_t identical = 0;
    for (std::size_t i = 0; i < inputs; ++i) {
      Vec x(d_model);
      for (double& v : x) v = rng.gaussian(0.0, 1.0);
      if (sgn_forward(x, p0).y == mlp_forward(x, base).y) ++identical;
    }

    Table inst({"instance", "eps", "base_deviation_ratio", "rff_grad_ratio", "gate_grad_ratio",
                "value_scaling_ratio"});
    Table scan({"instance", "gate_bias", "gate", "ar_grad_norm", "normalized"});
    double worst_value_ratio_err = 0.0;
    bool ratios_ok = true;
    bool gate_ok = true;
    for (std::size_t i = 0; i < instances; ++i) {
      InitConfig unit = init;
      unit.eps = 1.0;
      SgnParams p = homotopy_init(d_model, d_ff, m, unit, rng);
      const DenseMatrix a_tilde = p.ar;
      const DenseMatrix xs = gaussian_matrix(8, d_model, rng);
      const DenseMatrix ts = gaussian_matrix(8, d_model, rng);
      const MlpGrads gm = batch_grads(base_mlp(p), xs, ts);

      auto at_eps = [&](double e) {
        SgnParams q = p;
        for (std::size_t k = 0; k < q.ar.size(); ++k) q.ar.values()[k] = e * a_tilde.values()[k];
        return q;
      };
      struct Measure {
        double base_dev;
        double rff;
        double gate;
      };
      auto measure = [&](double e) {
        const SgnGrads g = batch_grads(at_eps(e), xs, ts);
        return Measure{diff_norm({{g.w1.values(), gm.w1.values()},
                                  {g.b1, gm.b1},
                                  {g.w2.values(), gm.w2.values()},
                                  {g.b2, gm.b2}}),
                       norm_of({g.wr.values(), g.br}), norm_of({g.wg, g.bg})};
      };
      const Measure full = measure(eps);
      const Measure half = measure(eps / 2.0);
      const double r_base = full.base_dev / half.base_dev;
      const double r_rff = full.rff / half.rff;
      const double r_gate = full.gate / half.gate;
      for (double r : {r_base, r_rff, r_gate}) ratios_ok = ratios_ok && r >= 1.8 && r <= 2.2;

      // ||T - phi|| doubles exactly with eps.
      Vec u(d_ff);
      for (double& v : u) v = rng.gaussian(0.0, 1.0);
      auto deviation = [&](double e) {
        const SgnParams q = at_eps(e);
        const Vec t = sgn_activation(u, q);
        double sq = 0.0;
        for (std::size_t k = 0; k < u.size(); ++k) {
          const double d = t[k] - activate(q.activation, u[k]);
          sq += d * d;
        }
        return std::sqrt(sq);
      };
      const double r_value = deviation(2.0 * eps) / deviation(eps);
      worst_value_ratio_err = std::max(worst_value_ratio_err, std::fabs(r_value - 2.0));
      inst.add_row({cell(i), eps, r_base, r_rff, r_gate, r_value});

      // ||grad A_r|| against sigmoid(b_g).
      double reference = 0.0;
      std::vector<std::pair<double, double>> rows;
      for (double bg : {-2.0, -4.0, -6.0}) {
        SgnParams q = at_eps(eps);
        std::fill(q.bg.begin(), q.bg.end(), bg);
        const double g = 1.0 / (1.0 + std::exp(-bg));
        const double n = norm_of({batch_grads(q, xs, ts).ar.values()}) / g;
        rows.emplace_back(bg, n);
        if (bg == -4.0) reference = n;
      }
      for (const auto& [bg, n] : rows) {
        const double normalized = n / reference;
        gate_ok = gate_ok && std::fabs(normalized - 1.0) <= 0.2;
        const double g = 1.0 / (1.0 + std::exp(-bg));
        scan.add_row({cell(i), bg, g, n * g, normalized});
      }
    }

    SgnParams ckpt = homotopy_init(d_model, d_ff, m, [&] {
      InitConfig i2 = init;
      i2.eps = eps;
      return i2;
    }(), rng);
    InitConfig echo = init;
    echo.eps = eps;
    out.files.emplace_back("checkpoint.json", checkpoint_to_json(ckpt, echo));
    out.table("homotopy_instances", inst);
    out.table("gate_scan", scan);
    out.json_file("homotopy_summary.json",
                  {{"value_identity", {{"identical", identical}, {"inputs", inputs}}},
                   {"max_value_ratio_error", worst_value_ratio_err}});
    out.check("value_identity_at_zero_eps", identical == inputs);
    out.check("value_scaling_exact", worst_value_ratio_err < 1e-10);
    out.check("gradient_ratios_in_range", ratios_ok);
    out.check("ar_gradient_tracks_gate", gate_ok);
    out.log << "identical forwards " << identical << "/" << inputs << ", max |ratio - 2| "
            << format_double(worst_value_ratio_err) << "\n";
  }
};

// ---------------------------------------------------------------------------
// kernel

struct KernelCmd {
  std::vector<std::size_t> m{64, 256, 1024, 4096};
  std::size_t trials = 200;
  double length_scale = 1.0;
  std::size_t grid_points = 20;
  double grid_step = 0.1;

  void declare(CLI::App* app, Params& p) {
    p.add(app, "m", m, "Feature counts");
    p.add(app, "trials", trials, "Independent frequency draws per m");
    p.add(app, "length-scale", length_scale, "Gaussian kernel length scale");
    p.add(app, "grid-points", grid_points, "Offsets 0, step, 2 step, ...");
    p.add(app, "grid-step", grid_step, "Offset spacing");
  }

  void run(const Common& c, Output& out) const {
    require(!m.empty() && trials > 0 && grid_points > 0, "kernel sizes must be positive");
    require(std::all_of(m.begin(), m.end(), [](std::size_t v) { return v > 0; }),
            "--m entries must be positive");
    require(length_scale > 0.0, "--length-scale must be positive");
    Table t({"m", "trials", "mean_sup_error", "std_error"});
    std::map<std::size_t, std::pair<double, double>> stats;
    Rng root(c.seed);
    for (std::size_t mm : m) {
      Rng rng(root.next_u64());
      double sum = 0.0;
      double sq = 0.0;
      const double y = 0.0;
      for (std::size_t trial = 0; trial < trials; ++trial) {
        const RffParams p = kernel_rff_init(1, mm, length_scale, rng);
        double sup = 0.0;
        for (std::size_t g = 0; g < grid_points; ++g) {
          const double x = grid_step * static_cast<double>(g);
          const double est = kernel_estimate(std::span<const double>(&x, 1),
                                             std::span<const double>(&y, 1), p);
          const double exact = std::exp(-x * x / (2.0 * length_scale * length_scale));
          sup = std::max(sup, std::fabs(est - exact));
        }
        sum += sup;
        sq += sup * sup;
      }
      const double n = static_cast<double>(trials);
      const double mean = sum / n;
      const double var = trials > 1 ? std::max(0.0, (sq - n * mean * mean) / (n - 1.0)) : 0.0;
      const double se = std::sqrt(var / n);
      stats[mm] = {mean, se};
      t.add_row({cell(mm), cell(trials), mean, se});
    }
    json ratios = json::array();
    bool rate_ok = true;
    for (const auto& [mm, s] : stats) {
      auto it = stats.find(16 * mm);
      if (it == stats.end()) continue;
      const double r = s.first / it->second.first;
      ratios.push_back({{"m", mm}, {"m16", 16 * mm}, {"ratio", r}});
      rate_ok = rate_ok && r >= 2.5 && r <= 6.0;
    }
    bool monotone = true;
    for (auto it = stats.begin(); std::next(it) != stats.end(); ++it) {
      const auto& next = std::next(it)->second;
      monotone = monotone && next.first <= it->second.first + it->second.second;
    }
    out.table("kernel", t);
    json summary{{"ratios", ratios}, {"length_scale", length_scale}};
    if (auto it = stats.find(4096); it != stats.end()) {
      summary["mean_sup_error_4096"] = it->second.first;
      out.check("sup_error_at_4096_below_0.03", it->second.first < 0.03);
    }
    out.json_file("kernel_summary.json", summary);
    out.check("error_ratio_m_to_16m_in_range", rate_ok);
    out.check("error_decreasing_in_m", monotone);
  }
};

// ---------------------------------------------------------------------------
// derive-sigma

struct DeriveSigmaCmd {
  std::size_t n = 4096;
  double range = 8.0;
  double target = 1.64;
  double tolerance = 0.15;

  void declare(CLI::App* app, Params& p) {
    p.add(app, "n", n, "Simpson subintervals (even)");
    p.add(app, "range", range, "Integrate over [-range, range], at most 8");
    p.add(app, "target", target, "Expected alpha");
    p.add(app, "tolerance", tolerance, "Allowed |alpha - target|");
  }

  void run(const Common&, Output& out) const {
    require(n >= 2 && n % 2 == 0, "--n must be even and at least 2");
    require(range > 0.0 && range <= 8.0, "--range must lie in (0, 8]");
    const AlphaDerivation d = derive_alpha_opt(n, range);
    const AlphaDerivation d2 = derive_alpha_opt(2 * n, range);
    const bool finite = std::isfinite(d.i1) && std::isfinite(d.i2) && std::isfinite(d.alpha);
    if (!finite) throw NumericError("quadrature produced a non-finite value");
    out.json_file("derive_sigma.json", {{"I1", d.i1},
                                        {"I2", d.i2},
                                        {"alpha", d.alpha},
                                        {"n", d.n},
                                        {"range", d.range},
                                        {"alpha_2n", d2.alpha},
                                        {"delta_alpha_2n", std::fabs(d2.alpha - d.alpha)},
                                        {"target_alpha", target},
                                        {"tolerance", tolerance},
                                        {"reference_I1", 0.168},
                                        {"reference_I2", 0.062}});
    Table s({"omega", "S"});
    for (int i = -160; i <= 160; ++i) {
      const double w = range * i / 160.0;
      s.add_row({w, gelu_spectrum(w)});
    }
    out.table("gelu_spectrum", s);
    out.check("alpha_within_tolerance", std::fabs(d.alpha - target) <= tolerance);
    out.check("alpha_converged", std::fabs(d2.alpha - d.alpha) < 1e-4);
    out.log << "I1 " << format_double(d.i1) << "\nI2 " << format_double(d.i2) << "\nalpha "
            << format_double(d.alpha) << "\n";
  }
};

// ---------------------------------------------------------------------------
// complexity

struct ComplexityCmd {
  std::size_t d_model = 768;
  std::size_t d_ff = 3072;
  std::size_t m = 64;
  std::vector<std::size_t> grid{2, 4, 8, 16};
  std::size_t order = 3;

  void declare(CLI::App* app, Params& p) {
    p.add(app, "d-model", d_model, "Model width");
    p.add(app, "d-ff", d_ff, "FFN hidden width");
    p.add(app, "m", m, "Spectral budget");
    p.add(app, "grid", grid, "Spline grid sizes G");
    p.add(app, "order", order, "Spline order K");
  }

  void run(const Common&, Output& out) const {
    require(d_model > 0 && d_ff > 0 && m > 0 && order > 0 && !grid.empty(),
            "complexity sizes must be positive");
    require(std::all_of(grid.begin(), grid.end(), [](std::size_t g) { return g > 0; }),
            "--grid entries must be positive");
    std::vector<Count> grids(grid.begin(), grid.end());
    const auto rows = grid_independence_report(d_model, d_ff, m, grids, order);
    Table t({"model", "convention", "d_in", "d_out", "m", "G", "K", "params", "flops"});
    std::vector<Count> sgn_params, kan_params;
    for (const auto& r : rows) {
      t.add_row({std::string(to_string(r.model)), std::string(to_string(r.convention)),
                 cell(static_cast<std::size_t>(r.inputs.d_in)),
                 cell(static_cast<std::size_t>(r.inputs.d_out)),
                 cell(static_cast<std::size_t>(r.inputs.m)),
                 cell(static_cast<std::size_t>(r.inputs.grid)),
                 cell(static_cast<std::size_t>(r.inputs.order)),
                 cell(static_cast<std::size_t>(r.params)), cell(static_cast<std::size_t>(r.flops))});
      (r.model == ModelKind::Sgn ? sgn_params : kan_params).push_back(r.params);
    }
    out.table("complexity", t);
    bool constant = std::adjacent_find(sgn_params.begin(), sgn_params.end(),
                                       std::not_equal_to<>()) == sgn_params.end();
    bool rising = true;
    std::vector<std::size_t> sorted = grid;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end()) {
      for (std::size_t i = 1; i < kan_params.size(); ++i) {
        if ((grid[i] > grid[i - 1]) != (kan_params[i] > kan_params[i - 1])) rising = false;
      }
    }
    out.check("sgn_params_independent_of_grid", constant);
    out.check("kan_params_increase_with_grid", rising);
  }
};

// ---------------------------------------------------------------------------
// Training subcommands share the model flags.

struct ModelFlags {
  std::size_t d_ff = 32;
  std::size_t m = 8;
  double sigma = 1.64;
  double eps = 1e-2;
  double gate_bias = -4.0;
  std::size_t epochs = 1000;
  double lr = 1e-3;

  void declare(CLI::App* app, Params& p) {
    p.add(app, "d-ff", d_ff, "SGN hidden width (baselines are budget-matched)");
    p.add(app, "m", m, "Spectral budget");
    p.add(app, "sigma", sigma, "RFF bandwidth");
    p.add(app, "eps", eps, "Spectral init scale");
    p.add(app, "gate-bias", gate_bias, "Initial gate bias");
    p.add(app, "epochs", epochs, "Training epochs");
    p.add(app, "lr", lr, "Adam learning rate");
  }

  void validate() const {
    require(d_ff > 0 && m > 0 && epochs > 0, "--d-ff, --m and --epochs must be positive");
    require(sigma > 0.0, "--sigma must be positive");
    require(eps >= 0.0, "--eps must be non-negative");
    require(lr > 0.0, "--lr must be positive");
  }

  InitConfig init() const {
    InitConfig i;
    i.sigma = sigma;
    i.eps = eps;
    i.gate_bias = gate_bias;
    return i;
  }

  TrainConfig train(std::uint64_t seed) const {
    TrainConfig t;
    t.epochs = epochs;
    t.learning_rate = lr;
    t.seed = seed;
    return t;
  }
};

// Majority of seeds where a <= b, per key.
struct Tally {
  std::size_t wins = 0;
  std::size_t total = 0;
  void add(bool win) {
    ++total;
    wins += win ? 1 : 0;
  }
  bool majority() const { return 2 * wins > total; }
};

// ---------------------------------------------------------------------------
// fit

struct FitCmd {
  ModelFlags model;
  std::vector<std::string> tasks{"high-freq-sum", "oscillating-decay"};
  std::vector<std::string> models{"sgn", "mlp-gelu"};
  std::size_t seeds = 5;
  std::size_t eval_every = 1;

  void declare(CLI::App* app, Params& p) {
    model.declare(app, p);
    p.add(app, "tasks", tasks, "Task names");
    p.add(app, "models", models, "Model families; the first sets the parameter budget");
    p.add(app, "seeds", seeds, "Number of seeds, counting up from --seed");
    p.add(app, "eval-every", eval_every, "Test RMSE cadence in epochs");
  }

  void run(const Common& c, Output& out) const {
    model.validate();
    require(seeds > 0 && eval_every > 0, "--seeds and --eval-every must be positive");
    require(!models.empty() && !tasks.empty(), "need at least one model and one task");
    std::vector<TaskSpec> specs;
    for (const auto& t : tasks) specs.push_back(find_task(t));
    std::vector<ModelSpec> ms;
    for (const auto& name : models) {
      ms.push_back(model_spec(parse_model_family(name), model.d_ff, model.m, model.init()));
    }
    TrainConfig cfg = model.train(c.seed);
    cfg.eval_every = eval_every;
    const auto cells = run_fit_suite(ms, specs, seed_range(c.seed, seeds), cfg);

    out.table("fit", fit_table(cells));
    std::vector<ExperimentReport> reports;
    for (const auto& cell : cells) {
      if (!cell.failed) reports.push_back(cell.report);
    }
    out.table("curves", curve_table(reports));

    // First model against every other, per task, on minimum test RMSE.
    json summary = json::array();
    for (const auto& task : specs) {
      for (std::size_t j = 1; j < ms.size(); ++j) {
        Tally tally;
        const std::string a = model_label(ms[0]);
        const std::string b = model_label(ms[j]);
        for (auto seed : seed_range(c.seed, seeds)) {
          const FitCell* ca = nullptr;
          const FitCell* cb = nullptr;
          for (const auto& cell : cells) {
            if (cell.task != task.name || cell.seed != seed) continue;
            if (cell.model == a) ca = &cell;
            if (cell.model == b) cb = &cell;
          }
          tally.add(ca && cb && !ca->failed &&
                    (cb->failed || ca->report.min_test_rmse <= cb->report.min_test_rmse));
        }
        summary.push_back({{"task", task.name}, {"model", a}, {"versus", b},
                           {"wins", tally.wins}, {"seeds", tally.total}});
        out.check(a + "<=" + b + ":" + task.name, tally.majority());
      }
    }
    out.json_file("fit_summary.json", summary);
  }
};

// ---------------------------------------------------------------------------
// sincos

struct SincosCmd {
  ModelFlags model{64};
  std::size_t grid_points = 2048;

  void declare(CLI::App* app, Params& p) {
    model.declare(app, p);
    p.add(app, "grid-points", grid_points, "Evaluation grid size for the spectra");
  }

  void run(const Common& c, Output& out) const {
    model.validate();
    require(grid_points >= 2, "--grid-points must be at least 2");
    SincosConfig cfg;
    cfg.width = model.d_ff;
    cfg.m = model.m;
    cfg.init = model.init();
    cfg.train = model.train(c.seed);
    cfg.grid_points = grid_points;
    const auto results = run_sincos_experiment(cfg);

    Table summary({"task", "model", "params", "status", "final_train_mse", "final_test_rmse",
                   "min_test_rmse", "spectrum_l1"});
    Table spectra({"task", "model", "bin", "magnitude"});
    Table preds({"task", "model", "x", "value"});
    for (const auto& r : results) {
      for (std::size_t k = 0; k < r.target_spectrum.size(); ++k) {
        spectra.add_row({r.task, std::string("target"), cell(k), r.target_spectrum[k]});
      }
      for (std::size_t i = 0; i < r.grid.size(); ++i) {
        preds.add_row({r.task, std::string("target"), r.grid[i], r.target[i]});
      }
      const SpectrumRecord* sgn = nullptr;
      const SpectrumRecord* relu = nullptr;
      for (const auto& m : r.models) {
        if (m.model == "SGN") sgn = &m;
        if (m.model == "MLP-ReLU") relu = &m;
        if (m.failed) {
          summary.add_row({r.task, m.model, cell(m.report.parameter_count), "failed: " + m.error,
                           {}, {}, {}, {}});
          continue;
        }
        summary.add_row({r.task, m.model, cell(m.report.parameter_count), std::string("ok"),
                         m.report.final_train_mse, m.report.final_test_rmse,
                         m.report.min_test_rmse, m.spectrum_l1});
        for (std::size_t k = 0; k < m.spectrum.size(); ++k) {
          spectra.add_row({r.task, m.model, cell(k), m.spectrum[k]});
        }
        for (std::size_t i = 0; i < r.grid.size(); ++i) {
          preds.add_row({r.task, m.model, r.grid[i], m.prediction[i]});
        }
      }
      out.check("sgn_spectrum_l1<=mlp_relu:" + r.task,
                sgn && relu && !sgn->failed && (relu->failed || sgn->spectrum_l1 <= relu->spectrum_l1));
    }
    out.table("sincos", summary);
    out.table("sincos_spectra", spectra);
    out.table("sincos_predictions", preds);
  }
};

// ---------------------------------------------------------------------------
// extrapolate

struct ExtrapolateCmd {
  ModelFlags model;
  std::size_t seeds = 5;

  void declare(CLI::App* app, Params& p) {
    model.declare(app, p);
    p.add(app, "seeds", seeds, "Number of seeds, counting up from --seed");
  }

  void run(const Common& c, Output& out) const {
    model.validate();
    require(seeds > 0, "--seeds must be positive");
    ExtrapolationConfig cfg;
    cfg.width = model.d_ff;
    cfg.m = model.m;
    cfg.init = model.init();
    cfg.train = model.train(c.seed);
    cfg.seeds = seed_range(c.seed, seeds);
    const auto rows = run_extrapolation_experiment(cfg);
    Table t({"model", "seed", "status", "train_mse", "extrapolation_mse"});
    for (const auto& r : rows) {
      if (r.failed) {
        t.add_row({r.model, cell(static_cast<std::size_t>(r.seed)), "failed: " + r.error, {}, {}});
      } else {
        t.add_row({r.model, cell(static_cast<std::size_t>(r.seed)), std::string("ok"), r.train_mse,
                   r.extrapolation_mse});
      }
    }
    out.table("extrapolation", t);
    bool pure_fails = true;
    bool hybrid_better = true;
    bool all_fit = true;
    for (auto seed : cfg.seeds) {
      const ExtrapolationRow* pure = nullptr;
      const ExtrapolationRow* hybrid = nullptr;
      for (const auto& r : rows) {
        if (r.seed != seed) continue;
        if (r.model == "PureSpectral") pure = &r;
        if (r.model == "SGN") hybrid = &r;
        all_fit = all_fit && !r.failed && r.train_mse < 1e-2;
      }
      const bool ok = pure && hybrid && !pure->failed && !hybrid->failed;
      pure_fails = pure_fails && ok && pure->extrapolation_mse >= 100.0 * pure->train_mse;
      hybrid_better = hybrid_better && ok && hybrid->extrapolation_mse <= 0.1 * pure->extrapolation_mse;
    }
    out.check("pure_spectral_extrapolation>=100x_train", pure_fails);
    out.check("hybrid_extrapolation<=0.1x_pure", hybrid_better);
    out.check("all_train_mse_below_1e-2", all_fit);
  }
};

// ---------------------------------------------------------------------------
// probe

struct ProbeCmd {
  ModelFlags model{32, 8, 1.64, 1e-2, -4.0, 2000};
  std::size_t seeds = 5;
  std::size_t grid_points = 1024;
  std::size_t probe_every = 10;
  double threshold = 0.1;

  void declare(CLI::App* app, Params& p) {
    model.declare(app, p);
    p.add(app, "seeds", seeds, "Number of seeds, counting up from --seed");
    p.add(app, "grid-points", grid_points, "Probe grid size on [0, 1)");
    p.add(app, "probe-every", probe_every, "Epochs between band measurements");
    p.add(app, "threshold", threshold, "Band counts as converged below this relative error");
  }

  void run(const Common& c, Output& out) const {
    model.validate();
    require(seeds > 0 && probe_every > 0, "--seeds and --probe-every must be positive");
    require(grid_points >= 64, "--grid-points must be at least 64 to resolve band 32");
    const TaskSpec task = three_tone_task(grid_points);
    SpectralProbeConfig probe;
    probe.grid_points = grid_points;
    probe.probe_every = probe_every;
    probe.threshold = threshold;
    const ModelSpec sgn = model_spec(ModelFamily::Sgn, model.d_ff, model.m, model.init());
    const ModelSpec mlp =
        match_budget(model_spec(ModelFamily::MlpGelu), 1, model_parameter_count(sgn, 1));

    Table bands({"model", "seed", "params", "status", "band", "converged_epoch", "final_error"});
    Table curve({"model", "seed", "epoch", "band", "relative_error"});
    Tally mlp_low_first;
    Tally sgn_high_first;
    for (auto seed : seed_range(c.seed, seeds)) {
      std::vector<ProbeResult> by_model;
      for (const auto& spec : {sgn, mlp}) {
        auto m = make_regressor(spec, task, seed);
        const std::size_t params = m->parameter_count();
        ProbeResult r = spectral_bias_probe(*m, task, probe, model.train(seed));
        r.model = model_label(spec);
        for (const auto& b : r.bands) {
          bands.add_row({r.model, cell(static_cast<std::size_t>(seed)), cell(params),
                         r.failed ? "failed: " + r.error : (b.skipped ? "skipped" : "ok"),
                         cell(b.band), b.converged_epoch ? cell(*b.converged_epoch) : Cell{},
                         b.final_error});
        }
        for (std::size_t i = 0; i < r.probe_epochs.size(); ++i) {
          for (std::size_t b = 0; b < r.bands.size(); ++b) {
            curve.add_row({r.model, cell(static_cast<std::size_t>(seed)), cell(r.probe_epochs[i]),
                           cell(r.bands[b].band), r.band_errors[i][b]});
          }
        }
        by_model.push_back(std::move(r));
      }
      // a <= b needs a to have converged; a band that never converges ranks last.
      auto epoch = [](const ProbeResult& r, std::size_t band) -> std::optional<std::size_t> {
        if (r.failed) return std::nullopt;
        for (const auto& b : r.bands) {
          if (b.band == band) return b.converged_epoch;
        }
        return std::nullopt;
      };
      auto leq = [](std::optional<std::size_t> a, std::optional<std::size_t> b) {
        return a.has_value() && (!b.has_value() || *a <= *b);
      };
      const ProbeResult& rs = by_model[0];
      const ProbeResult& rm = by_model[1];
      mlp_low_first.add(leq(epoch(rm, 1), epoch(rm, 32)));
      sgn_high_first.add(leq(epoch(rs, 32), epoch(rm, 32)));
    }
    out.table("probe", bands);
    out.table("probe_curve", curve);
    out.json_file("probe_summary.json",
                  {{"mlp_band1_leq_band32", {{"seeds", mlp_low_first.wins}, {"of", mlp_low_first.total}}},
                   {"sgn_band32_leq_mlp_band32",
                    {{"seeds", sgn_high_first.wins}, {"of", sgn_high_first.total}}}});
    out.check("mlp_band1_before_band32", mlp_low_first.majority());
    out.check("sgn_band32_before_mlp_band32", sgn_high_first.majority());
  }
};

// ---------------------------------------------------------------------------
// gate-ablation

struct GateAblationCmd {
  ModelFlags model;
  std::vector<std::string> tasks{"bessel", "high-freq-sum", "oscillating-decay"};
  std::size_t seeds = 3;

  void declare(CLI::App* app, Params& p) {
    model.declare(app, p);
    p.add(app, "tasks", tasks, "Task names");
    p.add(app, "seeds", seeds, "Number of seeds, counting up from --seed");
  }

  void run(const Common& c, Output& out) const {
    model.validate();
    require(seeds > 0 && !tasks.empty(), "need at least one seed and one task");
    for (const auto& t : tasks) find_task(t);
    GateAblationConfig cfg;
    cfg.width = model.d_ff;
    cfg.m = model.m;
    cfg.init = model.init();
    cfg.train = model.train(c.seed);
    cfg.tasks = tasks;
    cfg.seeds = seed_range(c.seed, seeds);
    const auto cells = run_gate_ablation(cfg);
    out.table("gate_ablation", fit_table(cells));
    bool no_failures = true;
    for (const auto& cell : cells) no_failures = no_failures && !cell.failed;
    out.check("all_variants_trained", no_failures);
    json summary = json::array();
    for (const auto& task : tasks) {
      Tally tally;
      for (auto seed : cfg.seeds) {
        const FitCell* full = nullptr;
        const FitCell* none = nullptr;
        for (const auto& cell : cells) {
          if (cell.task != task || cell.seed != seed) continue;
          if (cell.model == "SGN") full = &cell;
          if (cell.model == "SGN-NoGate") none = &cell;
        }
        tally.add(full && none && !full->failed &&
                  (none->failed || full->report.min_test_rmse <= none->report.min_test_rmse));
      }
      summary.push_back({{"task", task}, {"gated_wins", tally.wins}, {"seeds", tally.total}});
    }
    out.json_file("gate_ablation_summary.json", summary);
  }
};

// ---------------------------------------------------------------------------

template <class Cmd>
struct Bound {
  Cmd cmd;
  Params params;
  Common common;
  CLI::App* app = nullptr;
};

json read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

int write_outputs(const std::string& sub, const Common& c, const json& echo, Output& out,
                  double seconds, std::ostream& err) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec) {
    err << "error: cannot create output directory '" << c.out << "': " << ec.message() << "\n";
    return kUsage;
  }
  json artifacts = json::array();
  for (const auto& [name, text] : out.files) {
    write_text(fs::path(c.out) / name, text);
    artifacts.push_back(name);
  }
  const bool passed = out.passed();
  json manifest{{"subcommand", sub},        {"seed", c.seed},   {"config", echo},
                {"artifacts", artifacts},   {"checks", out.checks},
                {"passed", passed},         {"wall_time_seconds", seconds}};
  write_text(fs::path(c.out) / "run_manifest.json", dump_json(manifest));
  return passed ? kOk : kCheckFailed;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral gating network toolkit", "sgn_cli"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  Bound<GradcheckCmd> gradcheck;
  Bound<HomotopyCmd> homotopy;
  Bound<KernelCmd> kernel;
  Bound<DeriveSigmaCmd> derive;
  Bound<ComplexityCmd> complexity;
  Bound<FitCmd> fit;
  Bound<SincosCmd> sincos;
  Bound<ExtrapolateCmd> extrapolate;
  Bound<ProbeCmd> probe;
  Bound<GateAblationCmd> ablation;

  auto bind = [&app](auto& b, const std::string& name, const std::string& help) {
    b.app = app.add_subcommand(name, help);
    add_common(b.app, b.params, b.common);
    b.cmd.declare(b.app, b.params);
  };
  bind(gradcheck, "gradcheck", "Analytic vs finite-difference gradients on random tiny blocks");
  bind(homotopy, "homotopy", "Cold-start identity and epsilon scaling of the spectral branch");
  bind(kernel, "kernel", "Random Fourier feature estimate of the Gaussian kernel");
  bind(derive, "derive-sigma", "Bandwidth from the GELU spectral energy integrals");
  bind(complexity, "complexity", "Parameter and FLOP counts across spline grid sizes");
  bind(fit, "fit", "Function approximation suite");
  bind(sincos, "sincos", "sin/cos fitting on [-20, 20] with prediction spectra");
  bind(extrapolate, "extrapolate", "x^2 extrapolation outside the training interval");
  bind(probe, "probe", "Per-band convergence epochs on a three-tone target");
  bind(ablation, "gate-ablation", "Gated vs ungated vs fixed-gate spectral branch");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return kUsage;
  }

  auto dispatch = [&](auto& b) -> int {
    if (!b.app->parsed()) return -1;
    const auto t0 = std::chrono::steady_clock::now();
    Output output;
    try {
      if (!b.common.config.empty()) b.params.apply_config(read_config(b.common.config));
      require(b.common.format == "csv" || b.common.format == "json",
              "--format must be csv or json");
      output.format = b.common.format;
      b.cmd.run(b.common, output);
    } catch (const UsageError& e) {
      err << "error: " << e.what() << "\n" << b.app->help();
      return kUsage;
    } catch (const ParameterError& e) {
      err << "error: " << e.what() << "\n";
      return kUsage;
    } catch (const ShapeError& e) {
      err << "error: " << e.what() << "\n";
      return kUsage;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return kCheckFailed;
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const int code = write_outputs(b.app->get_name(), b.common, b.params.echo(), output, seconds, err);
    out << output.log.str();
    for (const auto& [name, ok] : output.checks.items()) {
      out << (ok.template get<bool>() ? "PASS " : "FAIL ") << name << "\n";
    }
    return code;
  };

  for (int code : {dispatch(gradcheck), dispatch(homotopy), dispatch(kernel), dispatch(derive),
                   dispatch(complexity), dispatch(fit), dispatch(sincos), dispatch(extrapolate),
                   dispatch(probe), dispatch(ablation)}) {
    if (code >= 0) return code;
  }
  err << app.help();
  return kUsage;
}

}  // namespace sgn::cli
