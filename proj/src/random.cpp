#include "rydkerr/random.hpp"

namespace rydkerr {

std::mt19937_64 substream(std::uint64_t seed, std::string_view name) {
  // FNV-1a over the stage name, mixed with the seed through seed_seq.
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : name) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace rydkerr
