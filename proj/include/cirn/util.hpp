#ifndef CIRN_UTIL_HPP_
#define CIRN_UTIL_HPP_

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>

namespace cirn
{

/// 64-bit FNV-1a; stable across platforms, used for config hashes.
std::uint64_t fnv1a64(std::string_view bytes);

/// fnv1a64 as 16 lower-case hex digits.
std::string hash_hex(std::string_view bytes);

/// Derives an independent stream seed from a base seed and labels.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> labels);

}  // namespace cirn

#endif  // CIRN_UTIL_HPP_
