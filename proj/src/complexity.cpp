#include "sgn/complexity.hpp"

#include "sgn/errors.hpp"

namespace sgn {

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Mlp: return "MLP";
    case ModelKind::Sgn: return "SGN";
    case ModelKind::Kan: return "KAN";
  }
  return "?";
}

std::string_view to_string(Convention c) {
  switch (c) {
    case Convention::Overhead: return "overhead";
    case Convention::SingleLayer: return "single-layer";
    case Convention::FfnBlock: return "ffn-block";
  }
  return "?";
}

Convention parse_convention(std::string_view name) {
  if (name == "overhead") return Convention::Overhead;
  if (name == "single-layer") return Convention::SingleLayer;
  if (name == "ffn-block") return Convention::FfnBlock;
  throw ParameterError("unknown cost convention '" + std::string(name) + "'");
}

Count sgn_param_overhead(Count d_ff, Count m, bool count_ln_affine) {
  Count total = (d_ff + 1) * m + 2 * m * d_ff + 2 * d_ff;
  if (count_ln_affine) total += 2 * d_ff;
  return total;
}

Count ffn_baseline_params(Count d_model, Count d_ff) {
  return 2 * d_model * d_ff + d_ff + d_model;
}

Count ffn_baseline_flops(Count d_model, Count d_ff) { return 4 * d_model * d_ff; }

Count kan_params(Count d_in, Count d_out, Count grid, Count order) {
  return d_in * d_out * (grid + order + 3) + d_out;
}

Count kan_params_body_text(Count d_in, Count d_out, Count grid, Count order) {
  return d_in * d_out * (grid + order) + d_out;
}

Count kan_flops(Count d_in, Count d_out, Count grid, Count order) {
  // 9K(G + 1.5K) + 2G - 2.5K + 3 = 9KG + 2G + 3 + K(27K - 5)/2, and K(27K - 5) is even.
  const Count k = order;
  const Count bracket = 9 * k * grid + 2 * grid + 3 + k * (27 * k - 5) / 2;
  return 7 * d_in + d_in * d_out * bracket;
}

Count mlp_params(Count d_in, Count d_out) { return d_in * d_out + d_out; }

Count mlp_flops(Count d_in, Count d_out) { return 2 * d_in * d_out + 5 * d_out; }

Count sgn_params_single_layer(Count d_in, Count d_out, Count m) {
  return d_in * m + m + 2 * d_in + d_in * d_out + d_out;
}

Count sgn_elementwise_flops(Count d_ff, Count m) { return 2 * m + 10 * d_ff; }

Count sgn_overhead_flops(Count d_ff, Count m) {
  return 2 * d_ff * m + 4 * d_ff * m + sgn_elementwise_flops(d_ff, m);
}

Count sgn_flops(Count d_in, Count d_out, Count m, Convention convention) {
  switch (convention) {
    case Convention::SingleLayer:
      return 4 * d_in * m + 2 * d_in + 2 * d_in * d_out + 5 * d_in;
    case Convention::FfnBlock:
      return ffn_baseline_flops(d_in, d_out) + sgn_overhead_flops(d_out, m);
    case Convention::Overhead:
      break;
  }
  throw ParameterError("sgn_flops: convention " + std::string(to_string(convention)) +
                       " defines no FLOPs count");
}

std::vector<CostReport> grid_independence_report(Count d_model, Count d_ff, Count m,
                                                 const std::vector<Count>& grids, Count order) {
  std::vector<CostReport> rows;
  for (Count g : grids) {
    CostReport sgn;
    sgn.model = ModelKind::Sgn;
    sgn.convention = Convention::FfnBlock;
    sgn.inputs = {d_model, d_ff, m, g, 0};
    sgn.params = ffn_baseline_params(d_model, d_ff) + sgn_param_overhead(d_ff, m, true);
    sgn.flops = sgn_flops(d_model, d_ff, m, Convention::FfnBlock);
    rows.push_back(sgn);

    CostReport kan;
    kan.model = ModelKind::Kan;
    kan.convention = Convention::SingleLayer;
    kan.inputs = {d_model, d_ff, 0, g, order};
    kan.params = kan_params(d_model, d_ff, g, order);
    kan.flops = kan_flops(d_model, d_ff, g, order);
    rows.push_back(kan);
  }
  return rows;
}

void write_cost_csv(std::ostream& out, const std::vector<CostReport>& rows) {
  out << "model,convention,d_in,d_out,m,G,K,params,flops\n";
  for (const auto& r : rows) {
    out << to_string(r.model) << ',' << to_string(r.convention) << ',' << r.inputs.d_in << ','
        << r.inputs.d_out << ',' << r.inputs.m << ',' << r.inputs.grid << ',' << r.inputs.order
        << ',' << r.params << ',' << r.flops << '\n';
  }
}

}  // namespace sgn
