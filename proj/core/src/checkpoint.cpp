#include "mctdhf/checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>

#include <fmt/format.h>

#include "mctdhf/config.hpp"

namespace mctdhf {

namespace {

constexpr std::array<char, 8> kMagic{'M', 'C', 'T', 'D', 'H', 'F', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw CheckpointError("checkpoint truncated");
  return v;
}

void put_vec(std::ostream& os, const CVec& v) {
  put<std::uint64_t>(os, static_cast<std::uint64_t>(v.size()));
  os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(cplx)));
}

CVec get_vec(std::istream& is) {
  const auto n = get<std::uint64_t>(is);
  if (n > (1ull << 36)) throw CheckpointError("implausible vector length in checkpoint");
  CVec v(static_cast<Eigen::Index>(n));
  is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(cplx)));
  if (!is) throw CheckpointError("checkpoint truncated");
  return v;
}

void put_wf(std::ostream& os, const WaveFunction& wf) {
  put<std::uint32_t>(os, static_cast<std::uint32_t>(wf.orbitals.size()));
  for (const auto& o : wf.orbitals) put_vec(os, o);
  put_vec(os, wf.ci);
}

WaveFunction get_wf(std::istream& is) {
  WaveFunction wf;
  const auto m = get<std::uint32_t>(is);
  if (m > 64) throw CheckpointError("implausible orbital count in checkpoint");
  for (std::uint32_t p = 0; p < m; ++p) wf.orbitals.push_back(get_vec(is));
  wf.ci = get_vec(is);
  return wf;
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw CheckpointError(fmt::format("cannot write '{}'", tmp.string()));
    os.write(kMagic.data(), kMagic.size());
    put(os, kVersion);
    put(os, ck.step);
    put(os, ck.t);
    put(os, ck.dt);
    put(os, ck.config_hash);
    put<std::uint64_t>(os, ck.config_text.size());
    os.write(ck.config_text.data(), static_cast<std::streamsize>(ck.config_text.size()));
    put_wf(os, ck.state);
    put_wf(os, ck.initial);
    if (!os) throw CheckpointError(fmt::format("error writing '{}'", tmp.string()));
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError(fmt::format("cannot open checkpoint '{}'", path.string()));
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kMagic) throw CheckpointError(fmt::format("'{}' is not a checkpoint", path.string()));
  if (get<std::uint32_t>(is) != kVersion) throw CheckpointError("unsupported checkpoint version");
  Checkpoint ck;
  ck.step = get<std::int64_t>(is);
  ck.t = get<double>(is);
  ck.dt = get<double>(is);
  ck.config_hash = get<std::uint64_t>(is);
  const auto len = get<std::uint64_t>(is);
  if (len > (1ull << 24)) throw CheckpointError("implausible configuration size in checkpoint");
  ck.config_text.resize(len);
  is.read(ck.config_text.data(), static_cast<std::streamsize>(len));
  if (!is) throw CheckpointError("checkpoint truncated");
  if (config_hash(ck.config_text) != ck.config_hash) throw CheckpointError("checkpoint configuration hash mismatch");
  ck.state = get_wf(is);
  ck.initial = get_wf(is);
  return ck;
}

}  // namespace mctdhf
