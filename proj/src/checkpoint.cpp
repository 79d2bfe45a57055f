#include "oceannet/checkpoint.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include "oceannet/errors.hpp"

namespace oceannet {

namespace {

constexpr char kMagic[4] = {'O', 'N', 'C', 'K'};
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
  if (!is.read(buf, sizeof(T))) throw IoError(path + ": truncated checkpoint");
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

std::array<std::uint32_t, 8> config_words(const FnoConfig& c) {
  return {static_cast<std::uint32_t>(c.width),        static_cast<std::uint32_t>(c.n_layers),
          static_cast<std::uint32_t>(c.modes.kmax_x), static_cast<std::uint32_t>(c.modes.kmax_y),
          static_cast<std::uint32_t>(c.in_channels),  static_cast<std::uint32_t>(c.out_channels),
          static_cast<std::uint32_t>(c.grid_h),       static_cast<std::uint32_t>(c.grid_w)};
}

}  // namespace

bool Checkpoint::identical(const Checkpoint& other) const {
  return params.identical(other.params) && step == other.step &&
         std::bit_cast<std::uint64_t>(ocean_mean) == std::bit_cast<std::uint64_t>(other.ocean_mean) &&
         std::bit_cast<std::uint64_t>(ocean_std) == std::bit_cast<std::uint64_t>(other.ocean_std);
}

std::uint64_t config_hash(const FnoConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint32_t word : config_words(cfg)) {
    for (int b = 0; b < 4; ++b) {
      h ^= (word >> (8 * b)) & 0xffu;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os.write(kMagic, 4);
  put<std::uint32_t>(os, kVersion);
  for (std::uint32_t word : config_words(ckpt.params.config)) put<std::uint32_t>(os, word);
  put<double>(os, ckpt.ocean_mean);
  put<double>(os, ckpt.ocean_std);
  put<std::uint64_t>(os, ckpt.params.scalar_count());
  for (const auto& t : ckpt.params.tensors)
    for (double v : t.value.raw()) put<double>(os, v);
  put<std::uint64_t>(os, ckpt.step);
  put<std::uint64_t>(os, config_hash(ckpt.params.config));
  if (!os) throw IoError("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string name = path.string();
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint " + name);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw IoError(name + ": not an ONCK checkpoint (bad magic)");
  }
  const auto version = get<std::uint32_t>(is, name);
  if (version != kVersion) throw IoError(name + ": unsupported version " + std::to_string(version));
  std::array<std::uint32_t, 8> w{};
  for (auto& word : w) word = get<std::uint32_t>(is, name);
  FnoConfig cfg;
  cfg.width = w[0];
  cfg.n_layers = w[1];
  cfg.modes = {w[2], w[3]};
  cfg.in_channels = w[4];
  cfg.out_channels = w[5];
  cfg.grid_h = w[6];
  cfg.grid_w = w[7];
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw IoError(name + ": invalid stored config: " + e.what());
  }
  Checkpoint ckpt;
  ckpt.ocean_mean = get<double>(is, name);
  ckpt.ocean_std = get<double>(is, name);
  ckpt.params = zero_params(cfg);
  const auto n = get<std::uint64_t>(is, name);
  if (n != ckpt.params.scalar_count()) {
    throw IoError(name + ": stores " + std::to_string(n) + " parameters, config implies " +
                  std::to_string(ckpt.params.scalar_count()));
  }
  for (auto& t : ckpt.params.tensors)
    for (double& v : t.value.raw()) v = get<double>(is, name);
  ckpt.step = get<std::uint64_t>(is, name);
  if (get<std::uint64_t>(is, name) != config_hash(cfg)) throw IoError(name + ": config hash mismatch");
  if (is.peek() != std::char_traits<char>::eof()) throw IoError(name + ": trailing bytes");
  return ckpt;
}

}  // namespace oceannet
