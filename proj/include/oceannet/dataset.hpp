#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "oceannet/field.hpp"
#include "oceannet/qg.hpp"

namespace oceannet {

enum class GenMode { Qg, Analytic };
enum class StorageType : std::uint32_t { F32 = 0, F64 = 1 };

struct GenConfig {
  std::size_t height = 64;
  std::size_t width = 64;
  GenMode mode = GenMode::Qg;
  std::uint64_t seed = 0;
  std::size_t n_train = 2000;
  std::size_t n_test = 200;
  std::uint32_t lead_days = 5;  // model days per saved frame
  double dt_days = 0.1;         // solver step
  double spinup_days = 300.0;
  /// Builtin mask id ("gulf", "open") or the path of a text raster of 0/1 rows.
  std::string mask = "gulf";
  StorageType storage = StorageType::F64;

  // Vorticity model.
  double hyperviscosity = 2e-11;
  double drag = 0.02;
  double beta = 0.0;
  double forcing_amplitude = 0.02;
  double forcing_k_min = 3.0;
  double forcing_k_max = 6.0;
  double forcing_tau = 2.0;
  double init_rms = 0.3;
  double init_k_peak = 4.0;
  double ssh_scale = 8.0;  // SSH per unit streamfunction

  // Analytic eddies.
  std::size_t n_eddies = 8;
  double eddy_amplitude = 0.3;
  double eddy_radius = 4.0;        // grid cells
  double eddy_drift = 0.2;         // grid cells per day, westward mean
  double eddy_drift_spread = 0.1;  // grid cells per day

  std::size_t n_time() const { return n_train + n_test; }
  std::size_t steps_per_frame() const;
  void validate() const;
  qg::Params solver_params() const;
};

/// Time-ordered SSH frames on a shared mask, in physical units with land set
/// to kLandFill. The first n_train frames form the training split.
struct OceanDataset {
  std::vector<FieldState> frames;
  Mask mask;
  std::uint32_t lead_days = 5;
  double ocean_mean = 0.0;  // training-split ocean statistics
  double ocean_std = 1.0;
  StorageType storage = StorageType::F64;
  std::size_t n_train = 0;

  std::size_t height() const { return mask.height(); }
  std::size_t width() const { return mask.width(); }
  std::size_t n_time() const { return frames.size(); }

  FieldState normalize(const FieldState& f) const;
  FieldState denormalize(const FieldState& f) const;
  /// Bitwise equality of headers, mask and frames.
  bool identical(const OceanDataset& other) const;
};

/// Mean and population std of ocean pixels across frames.
std::pair<double, double> ocean_stats(std::span<const FieldState> frames);

/// Builtin pattern or raster file. Throws ConfigError naming the path when a
/// raster cannot be read.
Mask make_mask(const std::string& spec, std::size_t height, std::size_t width);

/// Scaled streamfunction on the mask, land set to kLandFill.
FieldState to_ssh(const Tensor& psi, const Mask& mask, double scale);

/// Sum of periodic Gaussian bumps a * exp(-d^2 / (2 r^2)) evaluated on the grid.
struct Eddy {
  double row, col, amplitude, radius;
};
Tensor eddy_field(std::size_t height, std::size_t width, std::span<const Eddy> eddies);

OceanDataset gen_dataset(const GenConfig& cfg);

/// Binary ONDS file. Frames are stored with the dataset's storage type.
void write_dataset(const std::filesystem::path& path, const OceanDataset& ds);
OceanDataset read_dataset(const std::filesystem::path& path);

/// `<stem>.meta.json` next to a dataset file.
std::filesystem::path sidecar_path(const std::filesystem::path& dataset_path);

}  // namespace oceannet
