#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "oceannet/checkpoint.hpp"
#include "oceannet/dataset.hpp"
#include "oceannet/fno.hpp"
#include "oceannet/loss.hpp"

namespace oceannet {

struct TrainConfig {
  std::string data;      // dataset path (CLI only)
  std::string ckpt_dir;  // where best.onck, last.onck and train_log.csv go; empty = no files
  FnoConfig fno;
  LossConfig loss;
  double lr = 1e-3;
  double lr_min = 1e-5;
  std::size_t batch_size = 16;
  std::size_t epochs = 20;
  std::uint64_t seed = 0;
  double val_fraction = 0.1;
  std::size_t max_samples = 0;  // cap on training samples per epoch; 0 = all
  std::size_t threads = 0;      // 0 = OCEANNET_THREADS or hardware concurrency

  void validate() const;
};

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_mse = 0.0;  // mean of mse1 + mse2
  double val_mu = 0.0;   // mean of mu1 + mu2
};

struct TrainResult {
  std::vector<EpochLog> log;
  Checkpoint best;  // lowest validation loss
  Checkpoint last;
};

/// Keeps freed tensor buffers in the heap instead of returning them to the
/// OS (glibc only; no-op elsewhere). train() calls it once.
void tune_allocator();

/// Worker count from OCEANNET_THREADS, else hardware concurrency (at least 1).
std::size_t default_threads();

/// One sample: frames t, t+1, t+2 of the training split.
struct Sample {
  std::size_t t;
};

/// Training and validation sample lists for a dataset: the last
/// max(1, floor(val_fraction * n)) windows of the training split validate.
std::pair<std::vector<Sample>, std::vector<Sample>> split_samples(std::size_t n_train,
                                                                  double val_fraction);

/// Gradient of the mean two-step loss over `batch` at `params`, flattened in
/// canonical parameter order. Identical for any thread count.
std::vector<double> batch_gradient(const FnoParams& params, std::span<const FieldState> normalized,
                                   std::span<const Sample> batch, const LossConfig& loss,
                                   std::size_t threads, double* mean_loss = nullptr);

/// Mini-batch Adam on the two-step loss with a cosine learning-rate decay.
/// Deterministic given the seed. On a non-finite loss the last good
/// parameters are written to last.onck and NumericError is thrown.
/// `on_epoch` (optional) is called after each epoch.
TrainResult train(const OceanDataset& ds, const TrainConfig& cfg,
                  const std::function<void(const EpochLog&)>& on_epoch = {});

/// Flat copies between parameter sets and raw vectors.
std::vector<double> flatten(const FnoParams& params);
void unflatten(std::span<const double> flat, FnoParams& params);

}  // namespace oceannet
