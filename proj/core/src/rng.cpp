#include "igsmc/rng.hpp"

namespace igsmc {

namespace {
std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}
}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return splitmix(splitmix(splitmix(seed) ^ a) ^ b);
}

Rng make_stream(std::uint64_t seed, std::uint64_t population, std::uint64_t index) {
  std::seed_seq seq{mix_seed(seed, population, index),
                    mix_seed(~seed, index, population)};
  return Rng(seq);
}

}  // namespace igsmc
