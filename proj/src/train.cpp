#include "oceannet/train.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#if defined(__GLIBC__)
#include <malloc.h>
#endif
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "oceannet/errors.hpp"
#include "oceannet/optimizer.hpp"
#include "oceannet/random.hpp"

namespace oceannet {

namespace {

// Runs job(worker) on n workers (the caller is worker 0) and waits. Workers
// persist so their thread-local FFT and mode-plan caches survive across jobs.
class WorkerPool {
 public:
  explicit WorkerPool(std::size_t n) : errors_(n) {
    for (std::size_t w = 1; w < n; ++w) threads_.emplace_back([this, w] { loop(w); });
  }
  ~WorkerPool() {
    {
      std::lock_guard lock(mu_);
      stop_ = true;
    }
    cv_.notify_all();
    for (auto& t : threads_) t.join();
  }
  std::size_t size() const { return errors_.size(); }

  void run(const std::function<void(std::size_t)>& job) {
    {
      std::lock_guard lock(mu_);
      job_ = &job;
      pending_ = threads_.size();
      ++generation_;
    }
    cv_.notify_all();
    execute(0);
    std::unique_lock lock(mu_);
    done_.wait(lock, [this] { return pending_ == 0; });
    job_ = nullptr;
    for (auto& e : errors_) {
      if (e) {
        auto err = e;
        for (auto& x : errors_) x = nullptr;
        std::rethrow_exception(err);
      }
    }
  }

 private:
  void execute(std::size_t w) {
    try {
      (*job_)(w);
    } catch (...) {
      errors_[w] = std::current_exception();
    }
  }

  void loop(std::size_t w) {
    std::size_t seen = 0;
    for (;;) {
      {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
        if (stop_) return;
        seen = generation_;
      }
      execute(w);
      {
        std::lock_guard lock(mu_);
        --pending_;
      }
      done_.notify_one();
    }
  }

  std::vector<std::thread> threads_;
  std::vector<std::exception_ptr> errors_;
  std::mutex mu_;
  std::condition_variable cv_, done_;
  const std::function<void(std::size_t)>* job_ = nullptr;
  std::size_t pending_ = 0, generation_ = 0;
  bool stop_ = false;
};

struct SampleLoss {
  double total = 0.0, mse = 0.0, mu = 0.0;
};

// Per-worker differentiable models over a shared pool.
class GradientEngine {
 public:
  GradientEngine(const FnoParams& params, std::size_t threads) : pool_(std::max<std::size_t>(threads, 1)) {
    for (std::size_t w = 0; w < pool_.size(); ++w) models_.push_back(std::make_unique<FnoModel>(params, true));
  }

  void assign(const FnoParams& params) {
    pool_.run([&](std::size_t w) { models_[w]->assign(params); });
  }

  // Sum of per-sample gradients in sample order; returns per-sample losses.
  std::vector<SampleLoss> gradient_sum(std::span<const FieldState> frames, std::span<const Sample> batch,
                                       const LossConfig& loss, std::vector<double>& sum) {
    const std::size_t n = pool_.size();
    std::vector<SampleLoss> losses(batch.size());
    std::fill(sum.begin(), sum.end(), 0.0);
    std::vector<std::vector<double>> slots(n > 1 ? batch.size() : 0);
    pool_.run([&](std::size_t w) {
      for (std::size_t i = w; i < batch.size(); i += n) {
        auto grads = sample_gradient(*models_[w], frames, batch[i], loss, losses[i]);
        if (n == 1) {
          add_into(grads, *models_[w], sum);
        } else {
          slots[i].assign(sum.size(), 0.0);
          add_into(grads, *models_[w], slots[i]);
        }
      }
    });
    for (const auto& s : slots)
      for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += s[k];
    return losses;
  }

  std::vector<SampleLoss> losses(std::span<const FieldState> frames, std::span<const Sample> samples,
                                 const LossConfig& loss) {
    const std::size_t n = pool_.size();
    std::vector<SampleLoss> out(samples.size());
    pool_.run([&](std::size_t w) {
      ad::NoGradGuard guard;
      for (std::size_t i = w; i < samples.size(); i += n) {
        const auto terms = evaluate(*models_[w], frames, samples[i], loss);
        out[i] = {terms.total.value().item(), terms.mse1 + terms.mse2, terms.mu1 + terms.mu2};
      }
    });
    return out;
  }

 private:
  static LossTerms evaluate(const FnoModel& model, std::span<const FieldState> frames, const Sample& s,
                            const LossConfig& loss) {
    const Mask& mask = frames[s.t].mask;
    return total_loss(model.tendency(mask), ad::Var(frames[s.t].values), frames[s.t + 1].values,
                      frames[s.t + 2].values, mask, loss);
  }

  static ad::GradientMap sample_gradient(const FnoModel& model, std::span<const FieldState> frames,
                                         const Sample& s, const LossConfig& loss, SampleLoss& out) {
    const auto terms = evaluate(model, frames, s, loss);
    out = {terms.total.value().item(), terms.mse1 + terms.mse2, terms.mu1 + terms.mu2};
    return ad::backward(terms.total, model.leaves());
  }

  static void add_into(const ad::GradientMap& grads, const FnoModel& model, std::vector<double>& dst) {
    std::size_t off = 0;
    for (const auto& leaf : model.leaves()) {
      auto g = grads.at(leaf.name()).raw();
      for (std::size_t k = 0; k < g.size(); ++k) dst[off + k] += g[k];
      off += g.size();
    }
  }

  WorkerPool pool_;
  std::vector<std::unique_ptr<FnoModel>> models_;
};

std::vector<FieldState> normalized_training(const OceanDataset& ds) {
  std::vector<FieldState> out;
  out.reserve(ds.n_train);
  for (std::size_t t = 0; t < ds.n_train; ++t) out.push_back(ds.normalize(ds.frames[t]));
  return out;
}

SampleLoss mean_of(std::span<const SampleLoss> v) {
  SampleLoss m;
  for (const auto& s : v) {
    m.total += s.total;
    m.mse += s.mse;
    m.mu += s.mu;
  }
  const double n = static_cast<double>(std::max<std::size_t>(v.size(), 1));
  return {m.total / n, m.mse / n, m.mu / n};
}

void write_log_header(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write " + path.string());
  os << "epoch,train_loss,val_loss,val_mse,val_mu\n";
}

void append_log(const std::filesystem::path& path, const EpochLog& e) {
  std::ofstream os(path, std::ios::app);
  if (!os) throw IoError("cannot append to " + path.string());
  os << std::setprecision(17) << e.epoch << ',' << e.train_loss << ',' << e.val_loss << ','
     << e.val_mse << ',' << e.val_mu << '\n';
}

}  // namespace

void TrainConfig::validate() const {
  fno.validate();
  loss.validate(fno.grid_w);
  if (!(lr > 0.0) || !(lr_min >= 0.0) || lr_min > lr) {
    throw ConfigError("TrainConfig: need 0 <= lr_min <= lr and lr > 0");
  }
  if (batch_size < 1) throw ConfigError("TrainConfig: batch_size must be >= 1");
  if (epochs < 1) throw ConfigError("TrainConfig: epochs must be >= 1");
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) {
    throw ConfigError("TrainConfig: val_fraction must lie in [0, 1)");
  }
}

void tune_allocator() {
#if defined(__GLIBC__)
  static std::once_flag once;
  std::call_once(once, [] {
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, -1);
    mallopt(M_TOP_PAD, 64 << 20);
  });
#endif
}

std::size_t default_threads() {
  if (const char* env = std::getenv("OCEANNET_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<std::size_t>(v);
    throw ConfigError(std::string("OCEANNET_THREADS must be a positive integer, got '") + env + "'");
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

std::pair<std::vector<Sample>, std::vector<Sample>> split_samples(std::size_t n_train,
                                                                  double val_fraction) {
  if (n_train < 3) throw ConfigError("training split needs at least 3 frames");
  const std::size_t n = n_train - 2;
  std::size_t n_val = static_cast<std::size_t>(std::floor(val_fraction * static_cast<double>(n)));
  if (val_fraction > 0.0) n_val = std::max<std::size_t>(n_val, 1);
  if (n_val >= n) throw ConfigError("validation fraction leaves no training samples");
  std::vector<Sample> tr, va;
  for (std::size_t t = 0; t < n; ++t) (t < n - n_val ? tr : va).push_back({t});
  return {tr, va};
}

std::vector<double> flatten(const FnoParams& params) {
  std::vector<double> flat;
  flat.reserve(params.scalar_count());
  for (const auto& t : params.tensors) flat.insert(flat.end(), t.value.raw().begin(), t.value.raw().end());
  return flat;
}

void unflatten(std::span<const double> flat, FnoParams& params) {
  if (flat.size() != params.scalar_count()) throw DimensionError("unflatten: size mismatch");
  std::size_t off = 0;
  for (auto& t : params.tensors) {
    auto dst = t.value.raw();
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(off), dst.size(), dst.begin());
    off += dst.size();
  }
}

std::vector<double> batch_gradient(const FnoParams& params, std::span<const FieldState> normalized,
                                   std::span<const Sample> batch, const LossConfig& loss,
                                   std::size_t threads, double* mean_loss) {
  GradientEngine engine(params, threads == 0 ? default_threads() : threads);
  std::vector<double> sum(params.scalar_count());
  const auto losses = engine.gradient_sum(normalized, batch, loss, sum);
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (double& g : sum) g *= inv;
  if (mean_loss) *mean_loss = mean_of(losses).total;
  return sum;
}

TrainResult train(const OceanDataset& ds, const TrainConfig& cfg,
                  const std::function<void(const EpochLog&)>& on_epoch) {
  cfg.validate();
  tune_allocator();
  if (cfg.fno.grid_h != ds.height() || cfg.fno.grid_w != ds.width()) {
    throw ConfigError("model grid " + std::to_string(cfg.fno.grid_h) + "x" +
                      std::to_string(cfg.fno.grid_w) + " does not match dataset grid " +
                      std::to_string(ds.height()) + "x" + std::to_string(ds.width()));
  }
  const auto frames = normalized_training(ds);
  auto [train_set, val_set] = split_samples(ds.n_train, cfg.val_fraction);
  std::size_t per_epoch = train_set.size();
  if (cfg.max_samples > 0) per_epoch = std::min(per_epoch, cfg.max_samples);
  const std::size_t batches = (per_epoch + cfg.batch_size - 1) / cfg.batch_size;
  const std::size_t total_steps = batches * cfg.epochs;

  const std::filesystem::path dir = cfg.ckpt_dir;
  const bool files = !cfg.ckpt_dir.empty();
  if (files) {
    std::filesystem::create_directories(dir);
    write_log_header(dir / "train_log.csv");
  }

  Checkpoint current{init_params(cfg.fno, cfg.seed), ds.ocean_mean, ds.ocean_std, 0};
  TrainResult result;
  result.best = current;
  double best_val = std::numeric_limits<double>::infinity();

  GradientEngine engine(current.params, cfg.threads == 0 ? default_threads() : cfg.threads);
  std::vector<double> flat = flatten(current.params);
  std::vector<double> grad(flat.size());
  Adam adam(flat.size());
  std::mt19937_64 rng(cfg.seed ^ 0x5851f42d4c957f2dULL);

  std::size_t epoch = 1;
  auto run_epoch = [&] {
    shuffle(std::span(train_set), rng);
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
      const std::size_t lo = b * cfg.batch_size, hi = std::min(per_epoch, lo + cfg.batch_size);
      const std::span<const Sample> batch(train_set.data() + lo, hi - lo);
      engine.assign(current.params);
      const auto losses = engine.gradient_sum(frames, batch, cfg.loss, grad);
      for (double g : grad)
        if (!std::isfinite(g)) throw NumericError("non-finite gradient");
      for (const auto& l : losses) loss_sum += l.total;
      const double inv = 1.0 / static_cast<double>(batch.size());
      for (double& g : grad) g *= inv;
      adam.step(flat, grad, cosine_lr(cfg.lr, cfg.lr_min, current.step, total_steps));
      unflatten(flat, current.params);
      ++current.step;
    }

    EpochLog row;
    row.epoch = epoch;
    row.train_loss = loss_sum / static_cast<double>(per_epoch);
    if (!val_set.empty()) {
      engine.assign(current.params);
      const auto v = mean_of(engine.losses(frames, val_set, cfg.loss));
      row.val_loss = v.total;
      row.val_mse = v.mse;
      row.val_mu = v.mu;
    } else {
      row.val_loss = row.train_loss;
    }
    if (!std::isfinite(row.val_loss) || !std::isfinite(row.train_loss)) {
      throw NumericError("non-finite loss");
    }
    result.log.push_back(row);
    if (row.val_loss < best_val) {
      best_val = row.val_loss;
      result.best = current;
      if (files) save_checkpoint(dir / "best.onck", current);
    }
    if (files) {
      save_checkpoint(dir / "last.onck", current);
      append_log(dir / "train_log.csv", row);
    }
    if (on_epoch) on_epoch(row);
  };
  for (; epoch <= cfg.epochs; ++epoch) {
    try {
      run_epoch();
    } catch (const NumericError& e) {
      if (files) save_checkpoint(dir / "last.onck", current);
      throw NumericError("training diverged in epoch " + std::to_string(epoch) + ": " + e.what() +
                         (files ? "; last good parameters saved to last.onck" : ""));
    }
  }
  result.last = current;
  return result;
}

}  // namespace oceannet
