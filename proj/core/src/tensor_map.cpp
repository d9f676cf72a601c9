#include "recut/tensor_map.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "recut/errors.hpp"

namespace recut {

namespace {

constexpr char kMagic[4] = {'R', 'C', 'U', 'T'};
constexpr std::uint16_t kVersion = 1;

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  put_u32(out, bits);
}

std::uint16_t get_u16(const std::string& buf, size_t pos) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(buf[pos]) |
                                    (static_cast<unsigned char>(buf[pos + 1]) << 8));
}

std::uint32_t get_u32(const std::string& buf, size_t pos) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
  return v;
}

float get_f32(const std::string& buf, size_t pos) {
  std::uint32_t bits = get_u32(buf, pos);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

[[noreturn]] void fail(const std::string& what, size_t offset) {
  throw ContainerError(what + " (offset " + std::to_string(offset) + ")");
}

}  // namespace

bool TensorMap::same_geometry(const TensorMap& other) const {
  if (entries.size() != other.entries.size()) return false;
  auto a = entries.begin();
  auto b = other.entries.begin();
  for (; a != entries.end(); ++a, ++b) {
    if (a->first != b->first || a->second.shape != b->second.shape) return false;
  }
  return true;
}

void write_container(const TensorMap& map, const std::string& path) {
  nlohmann::json tensors = nlohmann::json::array();
  std::string blobs;
  for (const auto& [name, tensor] : map.entries) {
    if (tensor.element_count() != tensor.values.size())
      throw ContainerError("tensor " + name + " shape/value-count mismatch");
    for (float v : tensor.values)
      if (!std::isfinite(v)) throw ContainerError("tensor " + name + " contains non-finite values");
    nlohmann::json entry;
    entry["name"] = name;
    entry["dtype"] = "f32";
    entry["shape"] = tensor.shape;
    entry["byte_offset"] = blobs.size();
    entry["byte_len"] = tensor.values.size() * 4;
    tensors.push_back(std::move(entry));
    for (float v : tensor.values) put_f32(blobs, v);
  }
  nlohmann::json header;
  header["tensors"] = std::move(tensors);
  header["metadata"] = map.metadata;
  std::string header_str = header.dump();

  std::string out;
  out.append(kMagic, 4);
  put_u16(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(header_str.size()));
  out += header_str;
  out += blobs;
  put_u32(out, static_cast<std::uint32_t>(
                   crc32(0L, reinterpret_cast<const Bytef*>(blobs.data()), blobs.size())));

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ContainerError("cannot open " + path + " for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw ContainerError("write failed for " + path);
}

TensorMap read_container(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ContainerError("cannot open " + path);
  std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

  if (buf.size() < 10) fail("container truncated before header", buf.size());
  if (std::memcmp(buf.data(), kMagic, 4) != 0) fail("bad container magic", 0);
  std::uint16_t version = get_u16(buf, 4);
  if (version != kVersion) fail("unsupported container version " + std::to_string(version), 4);
  std::uint32_t header_len = get_u32(buf, 6);
  size_t header_start = 10;
  if (buf.size() < header_start + header_len) fail("container truncated inside header", buf.size());

  nlohmann::json header =
      nlohmann::json::parse(buf.substr(header_start, header_len), nullptr, false);
  if (header.is_discarded()) fail("container header is not valid JSON", header_start);

  size_t blob_start = header_start + header_len;
  if (buf.size() < blob_start + 4) fail("container truncated before checksum", buf.size());
  size_t blob_len = buf.size() - blob_start - 4;

  // Integrity first: a corrupt blob should report as a checksum mismatch,
  // not as whatever garbage values it happens to decode into.
  std::uint32_t stored_crc = get_u32(buf, blob_start + blob_len);
  std::uint32_t actual_crc = static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(buf.data() + blob_start), blob_len));
  if (stored_crc != actual_crc) fail("container checksum mismatch", blob_start + blob_len);

  TensorMap map;
  if (header.contains("metadata"))
    map.metadata = header["metadata"].get<std::map<std::string, std::string>>();
  for (const auto& entry : header.value("tensors", nlohmann::json::array())) {
    std::string name = entry.at("name").get<std::string>();
    std::string dtype = entry.at("dtype").get<std::string>();
    if (dtype != "f32") fail("tensor " + name + " has unsupported dtype " + dtype, blob_start);
    std::uint64_t off = entry.at("byte_offset").get<std::uint64_t>();
    std::uint64_t len = entry.at("byte_len").get<std::uint64_t>();
    if (off + len > blob_len)
      fail("container truncated mid-blob for tensor " + name, blob_start + blob_len);
    Tensor t;
    t.shape = entry.at("shape").get<std::vector<std::uint32_t>>();
    if (t.element_count() * 4 != len)
      fail("tensor " + name + " shape disagrees with byte_len", blob_start + off);
    t.values.resize(len / 4);
    for (size_t i = 0; i < t.values.size(); ++i)
      t.values[i] = get_f32(buf, blob_start + off + i * 4);
    for (float v : t.values)
      if (!std::isfinite(v)) fail("tensor " + name + " contains non-finite values", blob_start + off);
    map.entries.emplace(std::move(name), std::move(t));
  }
  return map;
}

}  // namespace recut
