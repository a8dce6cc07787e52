#pragma once

#include "tcs/ndgrad/tape.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <vector>

namespace tcs::ndgrad {

// Binary container:
//   8 bytes  magic "TCSCKPT\0"
//   u32      format version
//   u64      header length
//   header   UTF-8 JSON {"version", "meta", "tensors": [{name, rows, cols, offset}]}
//   payload  little-endian f64 values, row-major, in header order
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  nlohmann::json meta;
  std::map<std::string, Matrix> tensors;
};

void save_checkpoint(const std::filesystem::path &path,
                     const nlohmann::json &meta,
                     const std::vector<const Parameter *> &params);
Checkpoint load_checkpoint(const std::filesystem::path &path);

// Copies tensors into parameters by name; StructuralError on a missing name or
// a shape mismatch.
void restore_parameters(const Checkpoint &ckpt,
                        const std::vector<Parameter *> &params);

} // namespace tcs::ndgrad
