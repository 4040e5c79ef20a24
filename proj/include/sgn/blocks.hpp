#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace sgn {

// A named, contiguous view of one learnable tensor. Parameter structs and their
// gradient twins expose blocks in the same order, which is what the optimizer,
// the gradient checker and the checkpoint writer walk over.
struct ParamBlock {
  std::string_view name;
  std::span<double> values;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

inline std::size_t count_parameters(const std::vector<ParamBlock>& blocks) {
  std::size_t n = 0;
  for (const auto& b : blocks) n += b.values.size();
  return n;
}

}  // namespace sgn
