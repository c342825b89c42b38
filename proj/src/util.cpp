#include "cirn/util.hpp"

#include <cstdio>

namespace cirn
{

std::uint64_t fnv1a64(std::string_view bytes)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::string_view bytes)
{
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> labels)
{
  // splitmix64 finalizer over each label.
  std::uint64_t x = base;
  for (std::uint64_t label : labels) {
    x += 0x9e3779b97f4a7c15ULL + label;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    x = z ^ (z >> 31);
  }
  return x;
}

}  // namespace cirn
