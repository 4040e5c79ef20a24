#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sgn/layers.hpp"

namespace sgn {

// Checkpoint document (JSON):
//   {
//     "format": "sgn-checkpoint", "version": 1,
//     "config": {"d_model"?, "d_in", "d_out", "d_ff", "m", "sigma", "eps",
//                "gate_bias_init", "activation", "branch", "seed"},
//     "blocks": [{"name": "W1", "rows": R, "cols": C, "dtype": "f64le",
//                 "data": "<base64 of R*C little-endian IEEE-754 doubles>"}, ...]
//   }
// Blocks appear in param_blocks() order. Round trips are bit-exact.

struct Checkpoint {
  SgnParams params;
  InitConfig init;
};

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);

std::string encode_doubles(std::span<const double> values);
std::vector<double> decode_doubles(const std::string& text);

std::string checkpoint_to_json(const SgnParams& params, const InitConfig& init);
Checkpoint checkpoint_from_json(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const SgnParams& params,
                     const InitConfig& init);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Parameter counts per block name, read from the shape headers of a checkpoint
// document without decoding its payloads.
std::map<std::string, std::size_t> checkpoint_block_sizes(const std::string& text);

}  // namespace sgn
