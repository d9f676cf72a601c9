#pragma once

#include <optional>
#include <vector>

#include "recut/tensor_map.hpp"

namespace recut {

enum class MergeMode { literal, delta };

struct MergeConfig {
  double alpha = 0.25;    // interpolation weight
  double density = 0.25;  // fraction of entries kept by magnitude, in (0, 1]
  MergeMode mode = MergeMode::delta;
  std::optional<TensorMap> base;  // required in delta mode
};

// Keeps the ceil(density * n) entries of largest absolute value (ties to
// the lower flat index), zeroes the rest.
std::vector<float> top_x(const std::vector<float>& values, double density);

// literal: out = acc + alpha * top_x(len)
// delta:   out = acc + alpha * top_x(len - base)
// Per-tensor and deterministic; name/shape misalignment raises
// MergeShapeError, a missing base in delta mode raises ConfigError.
TensorMap merge(const TensorMap& m_acc, const TensorMap& m_len, const MergeConfig& cfg);

}  // namespace recut
