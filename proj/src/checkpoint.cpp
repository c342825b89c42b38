#include <bit>
#include <cstring>
#include <fstream>

#include "cirn/errors.hpp"
#include "cirn/policy_net.hpp"

namespace cirn
{

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

namespace
{

constexpr char kMagic[8] = {'C', 'I', 'R', 'N', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template<typename T>
void put(std::ostream & out, T value)
{
  out.write(reinterpret_cast<const char *>(&value), sizeof(T));
}

void put_string(std::ostream & out, std::string_view s)
{
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template<typename T>
T get(std::istream & in)
{
  T value{};
  if (!in.read(reinterpret_cast<char *>(&value), sizeof(T))) {
    throw ParseError("checkpoint: unexpected end of file");
  }
  return value;
}

std::string get_string(std::istream & in)
{
  const auto n = get<std::uint32_t>(in);
  if (n > (1u << 20)) {
    throw ParseError("checkpoint: string length out of range");
  }
  std::string s(n, '\0');
  if (n > 0 && !in.read(s.data(), n)) {
    throw ParseError("checkpoint: unexpected end of file");
  }
  return s;
}

}  // namespace

void save_checkpoint(const Checkpoint & ckpt, const std::filesystem::path & path)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw ParseError("cannot write checkpoint " + path.string());
  }
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kVersion);
  put<std::uint64_t>(out, ckpt.seed);
  put<std::uint64_t>(out, ckpt.step);
  put_string(out, ckpt.config_hash);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.params.adjacency));
  const auto groups = ckpt.params.groups();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(groups.size()));
  for (std::size_t g = 0; g < groups.size(); ++g) {
    put_string(out, ModelParams::group_names()[g]);
    put<std::uint64_t>(out, groups[g]->rows);
    put<std::uint64_t>(out, groups[g]->cols);
    out.write(reinterpret_cast<const char *>(groups[g]->data.data()),
      static_cast<std::streamsize>(groups[g]->data.size() * sizeof(double)));
  }
  if (!out) {
    throw ParseError("error writing checkpoint " + path.string());
  }
}

Checkpoint load_checkpoint(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open checkpoint " + path.string());
  }
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ParseError("checkpoint: bad magic in " + path.string());
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion) {
    throw ParseError("checkpoint: unsupported version " + std::to_string(version));
  }
  Checkpoint ckpt;
  ckpt.seed = get<std::uint64_t>(in);
  ckpt.step = get<std::uint64_t>(in);
  ckpt.config_hash = get_string(in);
  const auto adjacency = get<std::uint32_t>(in);
  if (adjacency > 1) {
    throw ValidationError("checkpoint: unknown adjacency code " + std::to_string(adjacency));
  }
  ckpt.params.adjacency = static_cast<Adjacency>(adjacency);
  const auto count = get<std::uint32_t>(in);
  auto groups = ckpt.params.groups();
  if (count != groups.size()) {
    throw ValidationError("checkpoint: expected " + std::to_string(groups.size()) +
            " parameter groups, found " + std::to_string(count));
  }
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const std::string name = get_string(in);
    if (name != ModelParams::group_names()[g]) {
      throw ValidationError("checkpoint: expected group '" +
              std::string(ModelParams::group_names()[g]) + "', found '" + name + "'");
    }
    const auto rows = get<std::uint64_t>(in);
    const auto cols = get<std::uint64_t>(in);
    if (rows != groups[g]->rows || cols != groups[g]->cols) {
      throw ValidationError("checkpoint: shape mismatch for '" + name + "': " +
              std::to_string(rows) + "x" + std::to_string(cols));
    }
    if (!in.read(reinterpret_cast<char *>(groups[g]->data.data()),
      static_cast<std::streamsize>(groups[g]->data.size() * sizeof(double))))
    {
      throw ParseError("checkpoint: truncated data for '" + name + "'");
    }
  }
  if (!ckpt.params.all_finite()) {
    throw ValidationError("checkpoint: non-finite parameter");
  }
  return ckpt;
}

}  // namespace cirn
