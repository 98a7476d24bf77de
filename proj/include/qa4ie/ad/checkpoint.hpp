#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "qa4ie/ad/graph.hpp"

namespace qa4ie::ad {

// Binary container, all integers and floats little-endian:
//
//   "QA4IE-CKPT-1"                 12-byte magic
//   u64 record_count
//   record_count x {
//     u64 name_bytes, name (UTF-8, no terminator)
//     u64 rank, rank x u64 dims
//     prod(dims) x f64 values (row-major)
//   }
inline constexpr char kCheckpointMagic[] = "QA4IE-CKPT-1";

struct NamedTensor {
  std::string name;
  Tensor value;
  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

std::string encode_checkpoint(const std::vector<NamedTensor>& records);
std::vector<NamedTensor> decode_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const ParameterSet& params);
std::vector<NamedTensor> read_checkpoint(const std::filesystem::path& path);

// Copies every stored record into the same-named parameter. Missing,
// extra, or differently shaped records are rejected by name.
void load_checkpoint(const std::filesystem::path& path, ParameterSet& params);
void assign_records(const std::vector<NamedTensor>& records, ParameterSet& params);

}  // namespace qa4ie::ad
