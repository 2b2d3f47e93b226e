#pragma once

#include <cstdint>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

namespace ultrafield {

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seedable, splittable random stream. Stream (seed, index) is a fixed
/// function of both arguments, so sample i of a batch is reproducible on its
/// own and batches can be split across workers. Boost distributions are used
/// because their output sequences are specified, unlike <random>'s.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t index = 0)
      : engine_(mix64(mix64(seed) ^ mix64(index ^ 0x5851f42d4c957f2dULL))) {}

  double normal() { return normal_(engine_); }

  double uniform(double low, double high) {
    return boost::random::uniform_real_distribution<double>(low, high)(engine_);
  }

  boost::random::mt19937_64& engine() { return engine_; }

 private:
  boost::random::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_;
};

}  // namespace ultrafield
