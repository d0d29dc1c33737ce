#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rydkerr {

/// Independent generator for the stage `name` derived from a run-level seed.
/// The same (seed, name) pair always yields the same sequence.
std::mt19937_64 substream(std::uint64_t seed, std::string_view name);

}  // namespace rydkerr
