#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace recut {

struct Tensor {
  std::vector<std::uint32_t> shape;
  std::vector<float> values;  // flat, row-major

  std::size_t element_count() const {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
  }
};

// Named flat f32 arrays plus free-form string metadata; the checkpoint
// representation every training and merge stage speaks.
struct TensorMap {
  std::map<std::string, Tensor> entries;  // ordered: container layout is name-sorted
  std::map<std::string, std::string> metadata;

  bool same_geometry(const TensorMap& other) const;
};

// Binary container, little-endian throughout:
//   magic "RCUT" | version u16 | header_len u32 | header JSON
//   | concatenated f32 blobs | crc32 u32 of the blob region
// The header lists {name, dtype:"f32", shape, byte_offset, byte_len} per
// tensor (offsets relative to the blob region) plus the metadata map.
// Round trips are bit-exact. Writing rejects non-finite values; reading
// throws ContainerError on bad magic, truncation, or checksum mismatch.
void write_container(const TensorMap& map, const std::string& path);
TensorMap read_container(const std::string& path);

}  // namespace recut
