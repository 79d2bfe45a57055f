#pragma once

#include <cstdint>
#include <filesystem>

#include "oceannet/fno.hpp"

namespace oceannet {

/// Trained operator plus the normalization it was trained under.
struct Checkpoint {
  FnoParams params;
  double ocean_mean = 0.0;
  double ocean_std = 1.0;
  std::uint64_t step = 0;  // optimizer steps taken

  bool identical(const Checkpoint& other) const;
};

/// 64-bit FNV-1a over the serialized FnoConfig.
std::uint64_t config_hash(const FnoConfig& cfg);

/// ONCK file: magic | version u32 | config u32 x 8 | mean f64 | std f64 |
/// n_params u64 | params f64 (canonical order) | step u64 | config hash u64.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace oceannet
