#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace fedchip {

// All randomness flows through this engine. Distributions come from
// Boost.Random so that sampled values do not depend on the standard library
// implementation.
using Rng = std::mt19937_64;

// Derives an independent stream from a list of keys, e.g.
// (seed, client_id, round, purpose).
inline Rng make_rng(std::initializer_list<std::uint64_t> keys) {
  std::vector<std::uint32_t> words;
  words.reserve(keys.size() * 2);
  for (std::uint64_t k : keys) {
    words.push_back(static_cast<std::uint32_t>(k & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(k >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

// Stream purposes; keep values stable, they are part of the reproducibility
// contract.
enum class Stream : std::uint64_t {
  kGenerate = 1,
  kSplit = 2,
  kKMeans = 3,
  kDirichlet = 4,
  kBaseModel = 5,
  kAdapterInit = 6,
  kBatchOrder = 7,
  kSampling = 8,
  kIidSplit = 9,
};

inline std::uint64_t key(Stream s) { return static_cast<std::uint64_t>(s); }

// splitmix64 finalizer over (a, b); used to give each evaluated description
// its own sampling seed.
inline std::uint64_t derive_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace fedchip
