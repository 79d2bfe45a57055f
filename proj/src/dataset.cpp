#include "oceannet/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "oceannet/errors.hpp"
#include "oceannet/fft.hpp"
#include "oceannet/random.hpp"

namespace oceannet {

namespace {

constexpr char kMagic[4] = {'O', 'N', 'D', 'S'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& os, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  os.write(buf, sizeof(T));
}

template <typename T>
T get(std::istream& is, const std::string& path) {
  char buf[sizeof(T)];
  if (!is.read(buf, sizeof(T))) throw IoError(path + ": truncated dataset file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

double wrap_delta(double d, double period) {
  d = std::fmod(d, period);
  if (d > period / 2) d -= period;
  if (d < -period / 2) d += period;
  return d;
}

Mask gulf_mask(std::size_t h, std::size_t w) {
  // Northern coast, western coast and a peninsula hanging from the north:
  // the ocean is a basin whose coastline is concave around the peninsula.
  std::vector<std::uint8_t> ocean(h * w, 1);
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      const bool north = 8 * i >= 7 * h;
      const bool west = 8 * j < w;
      const bool peninsula = 8 * j >= 3 * w && 8 * j < 4 * w && 2 * i >= h;
      if (north || west || peninsula) ocean[i * w + j] = 0;
    }
  }
  return Mask(h, w, std::move(ocean));
}

Mask raster_mask(const std::string& path, std::size_t h, std::size_t w) {
  std::ifstream in(path);
  if (!in) throw ConfigError("mask file not readable: " + path);
  std::vector<std::uint8_t> ocean;
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    std::size_t cols = 0;
    for (char ch : line) {
      if (ch == '0' || ch == '1') {
        ocean.push_back(ch == '1');
        ++cols;
      } else if (ch != ' ' && ch != '\t' && ch != '\r' && ch != ',') {
        throw ConfigError("mask file " + path + ": unexpected character '" + std::string(1, ch) + "'");
      }
    }
    if (cols == 0) continue;
    if (cols != w) {
      throw ConfigError("mask file " + path + ": row " + std::to_string(rows) + " has " +
                        std::to_string(cols) + " cells, expected " + std::to_string(w));
    }
    ++rows;
  }
  if (rows != h) {
    throw ConfigError("mask file " + path + ": " + std::to_string(rows) + " rows, expected " +
                      std::to_string(h));
  }
  return Mask(h, w, std::move(ocean));
}

void round_to_float(FieldState& f) {
  for (double& v : f.values.real()) v = static_cast<double>(static_cast<float>(v));
}

std::vector<FieldState> qg_frames(const GenConfig& cfg, const Mask& mask) {
  qg::Solver solver(cfg.solver_params(), cfg.seed);
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  solver.set_vorticity(
      qg::random_vorticity(cfg.height, cfg.width, cfg.init_k_peak, cfg.init_rms, rng));
  const auto spinup = static_cast<std::size_t>(std::llround(cfg.spinup_days / cfg.dt_days));
  for (std::size_t s = 0; s < spinup; ++s) solver.step();

  const std::size_t per = cfg.steps_per_frame();
  std::vector<FieldState> frames;
  frames.reserve(cfg.n_time());
  std::vector<double> acc(cfg.height * cfg.width);
  for (std::size_t t = 0; t < cfg.n_time(); ++t) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t s = 0; s < per; ++s) {
      solver.step();
      const Tensor psi = solver.streamfunction();
      auto pv = psi.real();
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += pv[i];
    }
    for (double& v : acc) v /= static_cast<double>(per);
    frames.push_back(to_ssh(Tensor::from({cfg.height, cfg.width}, acc), mask, cfg.ssh_scale));
  }
  return frames;
}

std::vector<FieldState> analytic_frames(const GenConfig& cfg, const Mask& mask) {
  std::mt19937_64 rng(cfg.seed);
  struct Track {
    Eddy start;
    double v_row, v_col;
  };
  std::vector<Track> tracks;
  const auto h = static_cast<double>(cfg.height), w = static_cast<double>(cfg.width);
  for (std::size_t e = 0; e < cfg.n_eddies; ++e) {
    Track tr{};
    tr.start.row = h * uniform01(rng);
    tr.start.col = w * uniform01(rng);
    const double sign = uniform01(rng) < 0.5 ? -1.0 : 1.0;
    tr.start.amplitude = sign * cfg.eddy_amplitude * (0.5 + 0.5 * uniform01(rng));
    tr.start.radius = cfg.eddy_radius * (0.75 + 0.5 * uniform01(rng));
    tr.v_row = cfg.eddy_drift_spread * standard_normal(rng);
    tr.v_col = -cfg.eddy_drift + cfg.eddy_drift_spread * standard_normal(rng);
    tracks.push_back(tr);
  }
  std::vector<FieldState> frames;
  std::vector<Eddy> now(tracks.size());
  for (std::size_t t = 0; t < cfg.n_time(); ++t) {
    const double days = static_cast<double>(t) * cfg.lead_days;
    for (std::size_t e = 0; e < tracks.size(); ++e) {
      now[e] = tracks[e].start;
      now[e].row = tracks[e].start.row + tracks[e].v_row * days;
      now[e].col = tracks[e].start.col + tracks[e].v_col * days;
    }
    FieldState f{eddy_field(cfg.height, cfg.width, now), mask};
    frames.push_back(f.masked());
  }
  return frames;
}

}  // namespace

std::size_t GenConfig::steps_per_frame() const {
  const double ratio = static_cast<double>(lead_days) / dt_days;
  const auto n = static_cast<std::size_t>(std::llround(ratio));
  if (n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-9 * ratio) {
    throw ConfigError("GenConfig: lead_days must be a whole number (>= 1) of dt_days steps");
  }
  return n;
}

void GenConfig::validate() const {
  fft::require_pow2(height, "grid height");
  fft::require_pow2(width, "grid width");
  if (n_train < 3) throw ConfigError("GenConfig: n_train must be >= 3");
  if (lead_days < 1) throw ConfigError("GenConfig: lead_days must be >= 1");
  if (!(dt_days > 0.0)) throw ConfigError("GenConfig: dt_days must be positive");
  if (spinup_days < 0.0) throw ConfigError("GenConfig: spinup_days must be >= 0");
  if (mode == GenMode::Qg) {
    steps_per_frame();
    solver_params().validate();
    if (!(init_rms >= 0.0) || !(init_k_peak > 0.0)) {
      throw ConfigError("GenConfig: init_rms must be >= 0 and init_k_peak > 0");
    }
  } else if (!(eddy_radius > 0.0)) {
    throw ConfigError("GenConfig: eddy_radius must be positive");
  }
}

qg::Params GenConfig::solver_params() const {
  qg::Params p;
  p.height = height;
  p.width = width;
  p.dt = dt_days;
  p.hyperviscosity = hyperviscosity;
  p.drag = drag;
  p.beta = beta;
  p.forcing_amplitude = forcing_amplitude;
  p.forcing_k_min = forcing_k_min;
  p.forcing_k_max = forcing_k_max;
  p.forcing_tau = forcing_tau;
  return p;
}

FieldState OceanDataset::normalize(const FieldState& f) const {
  FieldState out = f;
  auto v = out.values.real();
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = f.mask.ocean(i) ? (v[i] - ocean_mean) / ocean_std : kLandFill;
  return out;
}

FieldState OceanDataset::denormalize(const FieldState& f) const {
  FieldState out = f;
  auto v = out.values.real();
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = f.mask.ocean(i) ? v[i] * ocean_std + ocean_mean : kLandFill;
  return out;
}

bool OceanDataset::identical(const OceanDataset& o) const {
  if (!(mask == o.mask) || lead_days != o.lead_days || storage != o.storage ||
      n_train != o.n_train || frames.size() != o.frames.size())
    return false;
  if (std::bit_cast<std::uint64_t>(ocean_mean) != std::bit_cast<std::uint64_t>(o.ocean_mean) ||
      std::bit_cast<std::uint64_t>(ocean_std) != std::bit_cast<std::uint64_t>(o.ocean_std))
    return false;
  for (std::size_t t = 0; t < frames.size(); ++t)
    if (!frames[t].values.identical(o.frames[t].values)) return false;
  return true;
}

std::pair<double, double> ocean_stats(std::span<const FieldState> frames) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& f : frames) {
    auto v = f.values.real();
    for (std::size_t i = 0; i < v.size(); ++i)
      if (f.mask.ocean(i)) {
        sum += v[i];
        ++n;
      }
  }
  if (n == 0) throw ConfigError("ocean_stats: no ocean pixels");
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (const auto& f : frames) {
    auto v = f.values.real();
    for (std::size_t i = 0; i < v.size(); ++i)
      if (f.mask.ocean(i)) ss += (v[i] - mean) * (v[i] - mean);
  }
  return {mean, std::sqrt(ss / static_cast<double>(n))};
}

Mask make_mask(const std::string& spec, std::size_t height, std::size_t width) {
  if (spec == "gulf") return gulf_mask(height, width);
  if (spec == "open") return Mask::all_ocean(height, width);
  return raster_mask(spec, height, width);
}

FieldState to_ssh(const Tensor& psi, const Mask& mask, double scale) {
  FieldState f{psi, mask};
  for (double& v : f.values.real()) v *= scale;
  return f.masked();
}

Tensor eddy_field(std::size_t height, std::size_t width, std::span<const Eddy> eddies) {
  Tensor out({height, width});
  auto v = out.real();
  const auto h = static_cast<double>(height), w = static_cast<double>(width);
  for (const auto& e : eddies) {
    const double inv = 1.0 / (2.0 * e.radius * e.radius);
    for (std::size_t i = 0; i < height; ++i) {
      const double dr = wrap_delta(static_cast<double>(i) - e.row, h);
      for (std::size_t j = 0; j < width; ++j) {
        const double dc = wrap_delta(static_cast<double>(j) - e.col, w);
        v[i * width + j] += e.amplitude * std::exp(-(dr * dr + dc * dc) * inv);
      }
    }
  }
  return out;
}

OceanDataset gen_dataset(const GenConfig& cfg) {
  cfg.validate();
  OceanDataset ds;
  ds.mask = make_mask(cfg.mask, cfg.height, cfg.width);
  if (ds.mask.ocean_count() == 0) throw ConfigError("mask has no ocean pixels");
  ds.frames = cfg.mode == GenMode::Qg ? qg_frames(cfg, ds.mask) : analytic_frames(cfg, ds.mask);
  ds.lead_days = cfg.lead_days;
  ds.storage = cfg.storage;
  ds.n_train = cfg.n_train;
  if (ds.storage == StorageType::F32)
    for (auto& f : ds.frames) round_to_float(f);
  const auto [mean, sd] = ocean_stats(std::span(ds.frames).first(ds.n_train));
  if (!(sd > 0.0)) throw ConfigError("generated training frames have zero variance");
  ds.ocean_mean = mean;
  ds.ocean_std = sd;
  return ds;
}

std::filesystem::path sidecar_path(const std::filesystem::path& dataset_path) {
  auto p = dataset_path;
  p.replace_extension(".meta.json");
  return p;
}

void write_dataset(const std::filesystem::path& path, const OceanDataset& ds) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os.write(kMagic, 4);
  put<std::uint32_t>(os, kVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(ds.frames.size()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(ds.height()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(ds.width()));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(ds.storage));
  put<std::uint32_t>(os, ds.lead_days);
  put<double>(os, ds.ocean_mean);
  put<double>(os, ds.ocean_std);
  const auto& bytes = ds.mask.bytes();
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  for (const auto& f : ds.frames) {
    for (double v : f.values.real()) {
      if (ds.storage == StorageType::F32)
        put<float>(os, static_cast<float>(v));
      else
        put<double>(os, v);
    }
  }
  if (!os) throw IoError("write failed: " + path.string());
}

OceanDataset read_dataset(const std::filesystem::path& path) {
  const std::string name = path.string();
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open dataset " + name);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw IoError(name + ": not an ONDS dataset (bad magic)");
  }
  const auto version = get<std::uint32_t>(is, name);
  if (version != kVersion) throw IoError(name + ": unsupported version " + std::to_string(version));
  const auto n_time = get<std::uint32_t>(is, name);
  const auto h = get<std::uint32_t>(is, name);
  const auto w = get<std::uint32_t>(is, name);
  const auto dtype = get<std::uint32_t>(is, name);
  if (dtype > 1) throw IoError(name + ": unknown dtype " + std::to_string(dtype));
  if (h == 0 || w == 0) throw IoError(name + ": empty grid");

  OceanDataset ds;
  ds.storage = static_cast<StorageType>(dtype);
  ds.lead_days = get<std::uint32_t>(is, name);
  ds.ocean_mean = get<double>(is, name);
  ds.ocean_std = get<double>(is, name);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(h) * w);
  if (!is.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()))) {
    throw IoError(name + ": truncated mask");
  }
  for (auto b : bytes)
    if (b > 1) throw IoError(name + ": mask bytes must be 0 or 1");
  ds.mask = Mask(h, w, std::move(bytes));
  ds.frames.reserve(n_time);
  for (std::uint32_t t = 0; t < n_time; ++t) {
    Tensor values({h, w});
    for (double& v : values.real()) {
      v = ds.storage == StorageType::F32 ? static_cast<double>(get<float>(is, name))
                                         : get<double>(is, name);
    }
    ds.frames.push_back({std::move(values), ds.mask});
  }
  if (is.peek() != std::char_traits<char>::eof()) throw IoError(name + ": trailing bytes");
  ds.n_train = n_time;
  const auto meta = sidecar_path(path);
  if (std::filesystem::exists(meta)) {
    std::ifstream ms(meta);
    const auto j = nlohmann::json::parse(ms, nullptr, false);
    if (j.is_object() && j.contains("n_train") && j["n_train"].is_number_unsigned()) {
      ds.n_train = std::min<std::size_t>(j["n_train"].get<std::size_t>(), n_time);
    }
  }
  return ds;
}

}  // namespace oceannet
