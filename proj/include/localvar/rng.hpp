#pragma once

#include <cstdint>
#include <random>

namespace localvar {

/// splitmix64 step; used to decorrelate derived seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derive an independent stream seed from a master seed and a stream index.
/// Every Monte-Carlo sample owns its own stream, so results do not depend
/// on how samples are distributed over workers.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(splitmix64(master) ^ splitmix64(index + 0x51ed270b8f2a4c95ULL));
}

using Rng = std::mt19937_64;

}  // namespace localvar
