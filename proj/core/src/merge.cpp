#include "recut/merge.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "recut/errors.hpp"

namespace recut {

std::vector<float> top_x(const std::vector<float>& values, double density) {
  if (density <= 0.0 || density > 1.0) throw ConfigError("top_x density must be in (0, 1]");
  if (values.empty()) return {};
  size_t n = values.size();
  // ceil with a guard against products like 0.1*10 landing a hair above an
  // integer in binary floating point.
  size_t k = static_cast<size_t>(std::ceil(density * static_cast<double>(n) - 1e-9));
  k = std::clamp<size_t>(k, 1, n);
  if (k == n) return values;

  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::nth_element(idx.begin(), idx.begin() + (k - 1), idx.end(), [&](size_t a, size_t b) {
    float ma = std::fabs(values[a]);
    float mb = std::fabs(values[b]);
    if (ma != mb) return ma > mb;
    return a < b;  // magnitude ties keep the lower flat index
  });
  std::vector<float> out(n, 0.0f);
  for (size_t i = 0; i < k; ++i) out[idx[i]] = values[idx[i]];
  return out;
}

TensorMap merge(const TensorMap& m_acc, const TensorMap& m_len, const MergeConfig& cfg) {
  if (!m_acc.same_geometry(m_len))
    throw MergeShapeError("accuracy and length tensor maps are not name/shape aligned");
  if (cfg.mode == MergeMode::delta) {
    if (!cfg.base) throw ConfigError("delta merge mode requires a base tensor map");
    if (!m_acc.same_geometry(*cfg.base))
      throw MergeShapeError("base tensor map is not aligned with the models being merged");
  }
  if (cfg.alpha < 0.0 || cfg.alpha > 1.0) throw ConfigError("merge alpha must be in [0, 1]");

  TensorMap out = m_acc;
  out.metadata["merge_mode"] = cfg.mode == MergeMode::delta ? "delta" : "literal";
  for (auto& [name, tensor] : out.entries) {
    const Tensor& len = m_len.entries.at(name);
    std::vector<float> term = len.values;
    if (cfg.mode == MergeMode::delta) {
      const Tensor& base = cfg.base->entries.at(name);
      for (size_t i = 0; i < term.size(); ++i)
        term[i] = static_cast<float>(static_cast<double>(len.values[i]) -
                                     static_cast<double>(base.values[i]));
    }
    term = top_x(term, cfg.density);
    for (size_t i = 0; i < tensor.values.size(); ++i)
      tensor.values[i] = static_cast<float>(static_cast<double>(tensor.values[i]) +
                                            cfg.alpha * static_cast<double>(term[i]));
  }
  return out;
}

}  // namespace recut
