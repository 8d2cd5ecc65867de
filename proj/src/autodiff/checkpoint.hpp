#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "autodiff/tensor.hpp"

namespace racelab {

// Versioned binary parameter container. Layout (little-endian):
//   "DRCK" | u32 version | u32 meta_count | (u32 klen, k, u32 vlen, v)*
//   | u64 tensor_count | (u32 nlen, name, u32 ndim, i32 dims..., f64 data)*
// Tensors are written in the order given, so writing a sorted list produces
// byte-identical files for identical contents.
struct Checkpoint {
  static constexpr uint32_t kVersion = 1;
  std::map<std::string, std::string> meta;
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor* find(const std::string& name) const;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);

// FormatError on bad magic or unknown version; IoError on filesystem trouble.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace racelab
