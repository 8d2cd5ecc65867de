#include "autodiff/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "common/errors.hpp"

namespace racelab {

namespace {

constexpr char kMagic[4] = {'D', 'R', 'C', 'K'};

void put_u32(std::ostream& out, uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}

void put_u64(std::ostream& out, uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

void put_str(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw FormatError("truncated checkpoint");
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw FormatError("truncated checkpoint");
  uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

std::string get_str(std::istream& in) {
  uint32_t n = get_u32(in);
  if (n > (1u << 20)) throw FormatError("unreasonable string length in checkpoint");
  std::string s(n, '\0');
  if (n && !in.read(s.data(), n)) throw FormatError("truncated checkpoint");
  return s;
}

}  // namespace

const Tensor* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return &t;
  return nullptr;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint '" + path + "'");
  out.write(kMagic, 4);
  put_u32(out, Checkpoint::kVersion);
  put_u32(out, static_cast<uint32_t>(ckpt.meta.size()));
  for (const auto& [k, v] : ckpt.meta) {
    put_str(out, k);
    put_str(out, v);
  }
  put_u64(out, ckpt.tensors.size());
  for (const auto& [name, t] : ckpt.tensors) {
    put_str(out, name);
    put_u32(out, static_cast<uint32_t>(t.shape().size()));
    for (int d : t.shape()) put_u32(out, static_cast<uint32_t>(d));
    static_assert(sizeof(double) == 8);
    out.write(reinterpret_cast<const char*>(t.data().data()),
              static_cast<std::streamsize>(sizeof(double) * t.data().size()));
  }
  if (!out) throw IoError("write failed for checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path + "'");
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw FormatError("'" + path + "' is not a DRCK checkpoint");
  uint32_t version = get_u32(in);
  if (version != Checkpoint::kVersion)
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  Checkpoint ckpt;
  uint32_t meta_count = get_u32(in);
  for (uint32_t i = 0; i < meta_count; ++i) {
    std::string k = get_str(in);
    ckpt.meta[k] = get_str(in);
  }
  uint64_t tensor_count = get_u64(in);
  for (uint64_t i = 0; i < tensor_count; ++i) {
    std::string name = get_str(in);
    uint32_t ndim = get_u32(in);
    if (ndim > 8) throw FormatError("unreasonable tensor rank in checkpoint");
    std::vector<int> shape;
    size_t total = 1;
    for (uint32_t d = 0; d < ndim; ++d) {
      uint32_t dim = get_u32(in);
      shape.push_back(static_cast<int>(dim));
      total *= dim;
    }
    std::vector<double> data(total);
    if (total &&
        !in.read(reinterpret_cast<char*>(data.data()),
                 static_cast<std::streamsize>(sizeof(double) * total)))
      throw FormatError("truncated checkpoint tensor '" + name + "'");
    ckpt.tensors.emplace_back(std::move(name), Tensor(std::move(shape), std::move(data)));
  }
  return ckpt;
}

}  // namespace racelab
