#include "asrkit/rng.hpp"

namespace asrkit {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void fnv_mix(std::uint64_t& h, unsigned char byte) {
  h ^= byte;
  h *= kFnvPrime;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view key, std::string_view tag) {
  std::uint64_t h = kFnvOffset;
  for (int i = 0; i < 8; ++i) fnv_mix(h, static_cast<unsigned char>(global_seed >> (8 * i)));
  for (char c : key) fnv_mix(h, static_cast<unsigned char>(c));
  fnv_mix(h, 0);  // separator so ("ab","c") != ("a","bc")
  for (char c : tag) fnv_mix(h, static_cast<unsigned char>(c));
  return splitmix64(h);
}

}  // namespace asrkit
