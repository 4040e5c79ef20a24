#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace sgn {

using Count = std::uint64_t;

enum class ModelKind { Mlp, Sgn, Kan };

// Counting conventions. They disagree on the SGN activation overhead, so each is
// kept as stated and never blended:
//   Overhead    - SGN parameter overhead (d_ff + 1) m + 2 m d_ff + 2 d_ff (+ 2 d_ff LN affine)
//   SingleLayer - one layer d_in -> d_out: KAN d_in d_out (G+K+3) + d_out, SGN 4 d_in M + ... FLOPs
//   FfnBlock    - FFN baseline 2 d_model d_ff + d_ff + d_model, overhead FLOPs 6 d_ff m + O(d_ff)
// A multiply-add counts as 2 FLOPs throughout.
enum class Convention { Overhead, SingleLayer, FfnBlock };

std::string_view to_string(ModelKind k);
std::string_view to_string(Convention c);
Convention parse_convention(std::string_view name);

struct CostInputs {
  Count d_in = 0;   // d_model for FFN-level reports
  Count d_out = 0;  // d_ff for FFN-level reports
  Count m = 0;      // spectral budget (0 when not applicable)
  Count grid = 0;   // G (0 when not applicable)
  Count order = 0;  // K (0 when not applicable)
};

struct CostReport {
  ModelKind model = ModelKind::Mlp;
  Convention convention = Convention::SingleLayer;
  CostInputs inputs;
  Count params = 0;
  Count flops = 0;
};

Count sgn_param_overhead(Count d_ff, Count m, bool count_ln_affine);
Count ffn_baseline_params(Count d_model, Count d_ff);
Count ffn_baseline_flops(Count d_model, Count d_ff);

// Table form d_in d_out (G + K + 3) + d_out; matches SplineLayerParams exactly.
Count kan_params(Count d_in, Count d_out, Count grid, Count order);
// Body-text form d_in d_out (G + K) + d_out, which omits the three per-edge extras.
Count kan_params_body_text(Count d_in, Count d_out, Count grid, Count order);
// 7 d_in + d_in d_out [9K (G + 1.5K) + 2G - 2.5K + 3]; the bracket is always an integer.
Count kan_flops(Count d_in, Count d_out, Count grid, Count order);

Count mlp_params(Count d_in, Count d_out);
Count mlp_flops(Count d_in, Count d_out);

// Single-layer SGN count: RFF map, mixing coefficients and output projection.
Count sgn_params_single_layer(Count d_in, Count d_out, Count m);

// Elementwise tally behind the O(d_ff + m) term: 2m for the trig pair, 5 d_ff for
// LayerNorm (mean, centre, square, scale, affine), 3 d_ff for gate affine and
// sigmoid, 2 d_ff for the Hadamard product and the residual add.
Count sgn_elementwise_flops(Count d_ff, Count m);
// 2 d_ff m (RFF projection) + 4 d_ff m (spectral mixing) + elementwise tally.
Count sgn_overhead_flops(Count d_ff, Count m);

// SingleLayer: 4 d_in M + 2 d_in + 2 d_in d_out + 5 d_in.
// FfnBlock: d_in = d_model, d_out = d_ff; 4 d_model d_ff + sgn_overhead_flops(d_ff, m).
// Overhead states no FLOPs and is rejected with ParameterError.
Count sgn_flops(Count d_in, Count d_out, Count m, Convention convention);

// SGN rows (FfnBlock overhead, G-independent) and KAN rows (SingleLayer table)
// for each G; KAN uses d_in = d_model, d_out = d_ff, K = order.
std::vector<CostReport> grid_independence_report(Count d_model, Count d_ff, Count m,
                                                 const std::vector<Count>& grids,
                                                 Count order = 3);

// Header: model,convention,d_in,d_out,m,G,K,params,flops
void write_cost_csv(std::ostream& out, const std::vector<CostReport>& rows);

}  // namespace sgn
