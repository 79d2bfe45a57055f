// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "oceannet/checkpoint.hpp"
#include "oceannet/cli.hpp"
#include "oceannet/dataset.hpp"
#include "oceannet/evaluate.hpp"
#include "oceannet/fft.hpp"
#include "oceannet/fno.hpp"
#include "oceannet/loss.hpp"
#include "oceannet/metrics.hpp"
#include "oceannet/ops.hpp"
#include "oceannet/pec.hpp"
#include "oceannet/random.hpp"
#include "oceannet/spectral.hpp"
#include "oceannet/train.hpp"

namespace fs = std::filesystem;
using namespace oceannet;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int prec = 3) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "<missing " + path.string() + ">";
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

Tensor random_tensor(Shape shape, std::mt19937_64& rng, DType dtype = DType::Real64) {
  Tensor t(std::move(shape), dtype);
  for (double& v : t.raw()) v = standard_normal(rng);
  return t;
}

// ---------------------------------------------------------------- criterion 1

Outcome gradient_oracle() {
  const auto t0 = Clock::now();
  FnoConfig cfg;
  cfg.width = 8;
  cfg.n_layers = 4;
  cfg.modes = {4, 4};
  cfg.grid_h = cfg.grid_w = 16;
  FnoParams params = init_params(cfg, 7);
  std::mt19937_64 rng(8);
  // Non-zero bias field so every tensor carries signal.
  for (double& v : params.at("bias_field").raw()) v = 0.1 * standard_normal(rng);
  const Mask mask = make_mask("gulf", 16, 16);
  auto masked = [&](Tensor t) {
    for (std::size_t i = 0; i < t.numel(); ++i)
      if (!mask.ocean(i)) t.real()[i] = kLandFill;
    return t;
  };
  const Tensor x = masked(random_tensor({16, 16}, rng));
  const Tensor y1 = masked(random_tensor({16, 16}, rng));
  const Tensor y2 = masked(random_tensor({16, 16}, rng));
  LossConfig loss = LossConfig::for_width(16);
  loss.reg_weight = 1.0;

  auto loss_at = [&](const FnoParams& p) {
    ad::NoGradGuard guard;
    const FnoModel model(p, false);
    return total_loss(model.tendency(mask), ad::Var(x), y1, y2, mask, loss).total.value().item();
  };

  const FnoModel model(params, true);
  const auto terms = total_loss(model.tendency(mask), ad::Var(x), y1, y2, mask, loss);
  const auto grads = ad::backward(terms.total, model.leaves());

  const double h = 1e-6;
  double worst = 0.0;
  std::string worst_name;
  FnoParams probe = params;
  for (auto& nt : probe.tensors) {
    const Tensor& analytic = grads.at(nt.name);
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < nt.value.raw().size(); ++i) {
      double& v = nt.value.raw()[i];
      const double keep = v;
      v = keep + h;
      const double up = loss_at(probe);
      v = keep - h;
      const double down = loss_at(probe);
      v = keep;
      const double fd = (up - down) / (2.0 * h);
      diff = std::max(diff, std::abs(fd - analytic.raw()[i]));
      scale = std::max(scale, std::abs(fd));
    }
    const double rel = diff / std::max(scale, 1e-12);
    if (rel > worst) {
      worst = rel;
      worst_name = nt.name;
    }
  }
  const double elapsed = seconds_since(t0);
  return {worst < 1e-4 && elapsed < 60.0,
          "max rel err " + fmt(worst) + " (" + worst_name + ") over " +
              std::to_string(params.scalar_count()) + " scalars, tol 1e-4; " + fmt(elapsed) + " s (limit 60 s)"};
}

// ---------------------------------------------------------------- criterion 2

Outcome pec_algebra() {
  const Mask mask = Mask::all_ocean(8, 8);
  std::mt19937_64 rng(21);
  const FieldState x{random_tensor({8, 8}, rng), mask};
  double worst = 0.0;
  for (double lambda : {-0.1, 0.01, 0.5}) {
    const Tendency linear = [lambda](const ad::Var& v) { return ad::scale(v, lambda); };
    const FieldState z = pec_step(linear, x);
    const double growth = 1.0 + lambda + 0.5 * lambda * lambda;
    for (std::size_t i = 0; i < z.values.numel(); ++i) {
      const double xi = x.values.real()[i];
      worst = std::max(worst, std::abs(z.values.real()[i] - growth * xi) / std::max(std::abs(xi), 1.0));
    }
  }
  const Tendency zero = [](const ad::Var& v) { return ad::scale(v, 0.0); };
  const Mask gulf = make_mask("gulf", 8, 8);
  const FieldState x0 = FieldState{random_tensor({8, 8}, rng), gulf}.masked();
  const auto trace = rollout(zero, x0, 25);
  bool identity = true;
  for (const auto& s : trace.states) identity = identity && s.values.identical(x0.values);
  return {worst <= 1e-12 && identity,
          "growth factor err " + fmt(worst) + " (tol 1e-12); zero operator identity over 25 steps: " +
              (identity ? "exact" : "broken")};
}

// ---------------------------------------------------------------- criterion 3

Outcome spectral_layer() {
  const std::size_t n = 8, cin = 2, cout = 3;
  std::mt19937_64 rng(31);
  const Tensor x = random_tensor({cin, n, n}, rng);
  const Tensor kernel = random_tensor({cout, cin, n, n}, rng);
  const ModeWindow win = ModeWindow::full(n, n);
  const std::size_t ncols = retained_cols(n, win.kmax_x);
  Tensor w({cout, cin, n, ncols}, DType::Complex128);
  for (std::size_t o = 0; o < cout; ++o) {
    for (std::size_t c = 0; c < cin; ++c) {
      std::vector<cplx> plane(n * n);
      for (std::size_t i = 0; i < n * n; ++i) plane[i] = kernel.real()[(o * cin + c) * n * n + i];
      fft::transform2d(plane, n, n, false);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t k = 0; k < ncols; ++k) w.cdata()[((o * cin + c) * n + r) * ncols + k] = plane[r * n + k];
    }
  }
  ad::NoGradGuard guard;
  const Tensor got = ad::spectral_conv(ad::Var(x), ad::Var(w), win).value();
  double conv_err = 0.0;
  for (std::size_t o = 0; o < cout; ++o)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t c = 0; c < cin; ++c)
          for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = 0; q < n; ++q)
              acc += kernel.real()[((o * cin + c) * n + p) * n + q] * x.at(c, (i + n - p) % n, (j + n - q) % n);
        conv_err = std::max(conv_err, std::abs(acc - got.at(o, i, j)));
      }

  const Tensor z = random_tensor({4, 16, 32}, rng, DType::Complex128);
  const Tensor zf = ad::fft2(ad::Var(z)).value();
  const Tensor back = ad::ifft2(ad::Var(zf)).value();
  double round = 0.0, e_space = 0.0, e_freq = 0.0;
  for (std::size_t i = 0; i < z.numel(); ++i) {
    round = std::max(round, std::abs(back.cdata()[i] - z.cdata()[i]));
    e_space += std::norm(z.cdata()[i]);
    e_freq += std::norm(zf.cdata()[i]);
  }
  const double parseval = std::abs(e_space - e_freq / (16.0 * 32.0)) / e_space;
  return {conv_err < 1e-8 && round < 1e-10 && parseval < 1e-10,
          "circular conv err " + fmt(conv_err) + " (tol 1e-8); round trip " + fmt(round) +
              " (tol 1e-10); Parseval rel " + fmt(parseval) + " (tol 1e-10)"};
}

// ---------------------------------------------------------------- criterion 4

double directed_mean(const ContourSet& a, const ContourSet& b) {
  double total = 0.0;
  for (const auto& p : a.points) {
    double best = INFINITY;
    for (const auto& q : b.points) {
      const double dr = p.row - q.row, dc = p.col - q.col;
      best = std::min(best, std::sqrt(dr * dr + dc * dc));
    }
    total += best;
  }
  return total / static_cast<double>(a.points.size());
}

Outcome mhd_oracle() {
  std::mt19937_64 rng(41);
  std::size_t exact = 0, self_zero = 0, symmetric = 0;
  auto random_set = [&] {
    ContourSet s;
    const std::size_t n = 1 + uniform_index(rng, 100);
    for (std::size_t i = 0; i < n; ++i) s.points.push_back({64.0 * uniform01(rng), 64.0 * uniform01(rng)});
    return s;
  };
  for (int t = 0; t < 100; ++t) {
    const ContourSet a = random_set(), b = random_set();
    const double oracle = std::max(directed_mean(a, b), directed_mean(b, a));
    exact += mhd(a, b) == oracle;
    self_zero += mhd(a, a) == 0.0;
    symmetric += mhd(a, b) == mhd(b, a);
  }
  return {exact == 100 && self_zero == 100 && symmetric == 100,
          "exact " + std::to_string(exact) + "/100, mhd(A,A)=0 " + std::to_string(self_zero) +
              "/100, symmetric " + std::to_string(symmetric) + "/100"};
}

// ------------------------------------------------------------ criteria 5 to 7

struct AblationOptions {
  std::size_t n_train = 2000;
  std::size_t n_test = 200;
  std::size_t epochs = 20;
  std::size_t pairs = 5;
  std::size_t max_samples = 0;
  std::uint64_t data_seed = 2024;
  fs::path work;
  bool full_scale() const { return n_train + n_test >= 2000 && epochs >= 20 && pairs >= 5 && max_samples == 0; }
};

struct TrainedModels {
  OceanDataset data;
  std::vector<Checkpoint> plain, regularized;
  double seconds = 0.0;
};

double band_error(const FieldState& pred, const FieldState& truth, std::size_t cutoff) {
  const auto sp = zonal_spectrum(pred.values).values;
  const auto st = zonal_spectrum(truth.values).values;
  double e = 0.0;
  for (std::size_t k = cutoff; k < sp.size(); ++k) e += (sp[k] - st[k]) * (sp[k] - st[k]);
  return e;
}

TrainedModels train_pairs(const AblationOptions& opt) {
  const auto t0 = Clock::now();
  TrainedModels out;
  GenConfig gen;
  gen.n_train = opt.n_train;
  gen.n_test = opt.n_test;
  gen.seed = opt.data_seed;
  std::cerr << "acceptance: generating " << gen.n_time() << " QG frames\n";
  out.data = gen_dataset(gen);
  write_dataset(opt.work / "qg.onds", out.data);

  for (std::size_t s = 0; s < opt.pairs; ++s) {
    for (double lambda : {0.0, 1e-3}) {
      TrainConfig cfg;
      cfg.seed = s + 1;
      cfg.epochs = opt.epochs;
      cfg.max_samples = opt.max_samples;
      cfg.loss = LossConfig::for_width(gen.width);
      cfg.loss.reg_weight = lambda;
      cfg.ckpt_dir = (opt.work / ("seed" + std::to_string(s + 1) + (lambda > 0 ? "_reg" : "_plain"))).string();
      const auto tm = Clock::now();
      const TrainResult r = train(out.data, cfg, [&](const EpochLog& e) {
        std::cerr << "  seed " << cfg.seed << " lambda " << lambda << " epoch " << e.epoch << ": train "
                  << e.train_loss << " val " << e.val_loss << " (" << fmt(seconds_since(tm), 4) << " s)\n";
      });
      (lambda > 0 ? out.regularized : out.plain).push_back(r.best);
    }
  }
  out.seconds = seconds_since(t0);
  return out;
}

std::vector<std::size_t> held_out_inits(const OceanDataset& ds, std::size_t count, std::size_t horizon) {
  const std::size_t first = ds.n_train, last = ds.n_time() - 1 - horizon;
  std::vector<std::size_t> inits;
  for (std::size_t j = 0; j < count; ++j) inits.push_back(first + j * (last - first) / std::max<std::size_t>(count - 1, 1));
  return inits;
}

Outcome spectral_bias(const TrainedModels& m, const AblationOptions& opt) {
  const auto t0 = Clock::now();
  const std::size_t cutoff = LossConfig::for_width(m.data.width()).cutoff_k;
  const auto inits = held_out_inits(m.data, 20, 10);
  std::size_t wins = 0;
  std::ostringstream pairs;
  for (std::size_t s = 0; s < m.plain.size(); ++s) {
    double err[2] = {0.0, 0.0};
    const Checkpoint* models[2] = {&m.plain[s], &m.regularized[s]};
    for (int which = 0; which < 2; ++which) {
      for (std::size_t init : inits) {
        const Forecast f = make_forecast(*models[which], m.data, init, 10);
        for (std::size_t k = 0; k < 10; ++k) err[which] += band_error(f.data.frames[k], m.data.frames[init + k + 1], cutoff);
      }
      err[which] /= static_cast<double>(inits.size() * 10);
    }
    wins += err[1] < err[0];
    pairs << (s ? "; " : "") << "seed " << s + 1 << ": " << fmt(err[0]) << " -> " << fmt(err[1]);
  }
  const double total = m.seconds + seconds_since(t0);
  const bool scale_ok = opt.full_scale();
  const bool pass = scale_ok && wins >= 4 && total <= 7200.0;
  return {pass, "regularized lower band error (k >= " + std::to_string(cutoff) + ") in " + std::to_string(wins) +
                    "/" + std::to_string(m.plain.size()) + " pairs [" + pairs.str() + "]; runtime " +
                    fmt(total / 3600.0) + " h on " + std::to_string(default_threads()) +
                    " thread(s) (limit 2 h)" + (scale_ok ? "" : "; REDUCED SCALE, not a full run")};
}

double ocean_rms(const FieldState& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.values.numel(); ++i)
    if (f.mask.ocean(i)) s += f.values.real()[i] * f.values.real()[i];
  return std::sqrt(s / static_cast<double>(f.mask.ocean_count()));
}

Outcome rollout_stability(const TrainedModels& m) {
  const Checkpoint& model = m.regularized.front();
  double clim = 0.0;
  for (std::size_t t = 0; t < m.data.n_train; ++t) clim += std::pow(ocean_rms(m.data.frames[t]), 2);
  clim = std::sqrt(clim / static_cast<double>(m.data.n_train));
  const std::size_t first = m.data.n_train, span = m.data.n_time() - first;
  std::size_t stable = 0;
  double worst = 0.0;
  for (std::size_t j = 0; j < 10; ++j) {
    try {
      const Forecast f = make_forecast(model, m.data, first + j * span / 10, 120);
      double peak = 0.0;
      for (const auto& fr : f.data.frames) peak = std::max(peak, ocean_rms(fr));
      worst = std::max(worst, peak / clim);
      stable += peak <= 3.0 * clim;
    } catch (const RolloutError&) {
      worst = INFINITY;
    }
  }
  return {stable >= 8, std::to_string(stable) + "/10 initializations stable over 120 steps (need 8); worst peak RMS " +
                           fmt(worst) + "x climatology " + fmt(clim)};
}

Outcome skill(const TrainedModels& m) {
  const Checkpoint& model = m.regularized.front();
  std::vector<Forecast> fc;
  for (std::size_t init : held_out_inits(m.data, 20, 6)) fc.push_back(make_forecast(model, m.data, init, 6));
  const EvalReport r = evaluate(m.data, fc);
  bool below_sat = true;
  std::ostringstream leads;
  for (std::size_t k = 1; k <= 6; ++k) {
    below_sat = below_sat && r.rows[k].model_rmse.mean < r.rmse_sat;
    leads << (k > 1 ? "," : "") << fmt(r.rows[k].model_rmse.mean);
  }
  const bool beats = r.rows[1].model_rmse.mean < r.rows[1].persist_rmse.mean;
  return {beats && below_sat, "lead-1 RMSE " + fmt(r.rows[1].model_rmse.mean) + " vs persistence " +
                                  fmt(r.rows[1].persist_rmse.mean) + " over " + std::to_string(fc.size()) +
                                  " inits; leads 1-6 RMSE [" + leads.str() + "] vs saturation " + fmt(r.rmse_sat)};
}

// ---------------------------------------------------------------- criterion 8

int run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != 0) std::cerr << "oceannet " << args.front() << " failed (" << code << "): " << err.str();
  return code;
}

Outcome determinism(const fs::path& work) {
  const fs::path dir = work / "determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream g(dir / "gen.json");
    g << R"({"height": 16, "width": 16, "n_train": 40, "n_test": 12, "spinup_days": 20})";
    std::ofstream t(dir / "train.json");
    t << R"({"epochs": 2, "batch_size": 4, "model": {"width": 8, "n_layers": 2, "modes_x": 4, "modes_y": 4}})";
  }
  std::vector<std::string> issues;
  std::string digest[2][5];
  for (int run = 0; run < 2; ++run) {
    const std::string tag = "run" + std::to_string(run);
    const std::string data = (dir / (tag + ".onds")).string(), ckpt = (dir / (tag + "_ckpt")).string();
    const std::string fc = (dir / (tag + "_fc.onds")).string();
    // The second run shards gradients over three workers; results must not change.
    setenv("OCEANNET_THREADS", run == 0 ? "1" : "3", 1);
    if (run_cli({"gen", "--config", (dir / "gen.json").string(), "--seed", "5", "--out", data}) != 0 ||
        run_cli({"train", "--config", (dir / "train.json").string(), "--data", data, "--ckpt", ckpt, "--seed", "9"}) != 0 ||
        run_cli({"forecast", "--ckpt", ckpt + "/best.onck", "--data", data, "--init-index", "41", "--steps", "8",
                 "--out", fc}) != 0) {
      unsetenv("OCEANNET_THREADS");
      return {false, "CLI pipeline failed"};
    }
    digest[run][0] = sha256_file(data);
    digest[run][1] = sha256_file(ckpt + "/train_log.csv");
    digest[run][2] = sha256_file(ckpt + "/best.onck");
    digest[run][3] = sha256_file(ckpt + "/last.onck");
    digest[run][4] = sha256_file(fc);
  }
  unsetenv("OCEANNET_THREADS");
  const char* names[5] = {"dataset", "train log", "best checkpoint", "last checkpoint", "forecast"};
  for (int i = 0; i < 5; ++i)
    if (digest[0][i] != digest[1][i]) issues.push_back(std::string(names[i]) + " digest differs");

  const OceanDataset ds = read_dataset(dir / "run0.onds");
  write_dataset(dir / "copy.onds", ds);
  fs::copy_file(sidecar_path(dir / "run0.onds"), sidecar_path(dir / "copy.onds"), fs::copy_options::overwrite_existing);
  if (sha256_file(dir / "copy.onds") != digest[0][0] || !read_dataset(dir / "copy.onds").identical(ds))
    issues.push_back("dataset round trip not bit-exact");
  const Checkpoint ck = load_checkpoint(dir / "run0_ckpt" / "best.onck");
  save_checkpoint(dir / "copy.onck", ck);
  if (sha256_file(dir / "copy.onck") != digest[0][2] || !load_checkpoint(dir / "copy.onck").identical(ck))
    issues.push_back("checkpoint round trip not bit-exact");

  std::string detail = issues.empty() ? "dataset, train log, checkpoints and forecast SHA-256 equal across runs "
                                        "(1 vs 3 threads); round trips bit-exact; forecast " +
                                            digest[0][4].substr(0, 16)
                                      : "";
  for (const auto& s : issues) detail += (detail.empty() ? "" : "; ") + s;
  return {issues.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"OceanNet acceptance checks"};
  AblationOptions opt;
  std::string work = "acceptance_work";
  std::vector<int> only;
  app.add_option("--work-dir", work, "Directory for generated data and checkpoints");
  app.add_option("--only", only, "Run only these criteria (1-8)");
  app.add_option("--frames", opt.n_train, "Training frames for the ablation (experiments only)");
  app.add_option("--epochs", opt.epochs, "Epochs for the ablation (experiments only)");
  app.add_option("--pairs", opt.pairs, "Seed pairs for the ablation (experiments only)");
  app.add_option("--max-samples", opt.max_samples, "Samples per epoch cap (experiments only)");
  CLI11_PARSE(app, argc, argv);
  opt.work = work;
  fs::create_directories(opt.work);
  auto wanted = [&](int id) { return only.empty() || std::find(only.begin(), only.end(), id) != only.end(); };

  std::cout << "ablation setup: " << opt.n_train + opt.n_test << " frames (" << opt.n_train << " train), "
            << opt.epochs << " epochs, " << opt.pairs << " seed pairs, " << default_threads() << " thread(s)\n"
            << std::flush;

  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& check) {
    if (!wanted(id)) return;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << name << ": " << o.detail << '\n' << std::flush;
  };

  report(1, "gradient oracle", gradient_oracle);
  report(2, "PEC algebra", pec_algebra);
  report(3, "spectral layer", spectral_layer);
  report(4, "modified Hausdorff distance", mhd_oracle);
  if (wanted(5) || wanted(6) || wanted(7)) {
    TrainedModels models;
    std::string train_error;
    try {
      models = train_pairs(opt);
    } catch (const std::exception& e) {
      train_error = e.what();
    }
    auto guarded = [&](const std::function<Outcome()>& f) {
      return [&, f]() -> Outcome {
        if (!train_error.empty()) return {false, "training failed: " + train_error};
        return f();
      };
    };
    report(5, "spectral-bias ablation", guarded([&] { return spectral_bias(models, opt); }));
    report(6, "rollout stability", guarded([&] { return rollout_stability(models); }));
    report(7, "skill vs baselines", guarded([&] { return skill(models); }));
  }
  report(8, "determinism and formats", [&] { return determinism(opt.work); });
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criterion/criteria failed") << '\n';
  return failures == 0 ? 0 : 1;
}
