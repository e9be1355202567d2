#pragma once

#include <cmath>
#include <cstdint>

#include "pggibbs/math_util.hpp"

namespace pggibbs {

// Counter-based splittable generator. Each (seed, stream) pair owns a
// disjoint SplitMix64 sequence: the stream index is hashed into both the
// starting counter and the (odd) increment, so chains never share state
// and any draw is reproducible from (seed, stream, position).
class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}

  RngStream(std::uint64_t seed, std::uint64_t stream) {
    state_ = mix(seed ^ mix(stream + 0x9e3779b97f4a7c15ull));
    gamma_ = mix(stream ^ mix(seed + 0xbf58476d1ce4e5b9ull)) | 1ull;
  }

  std::uint64_t next_u64() {
    state_ += gamma_;
    return mix(state_);
  }

  // Uniform on the open interval (0,1); never returns an endpoint.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; stateless across calls by design so
  // that copying the stream copies the full generator state.
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  // Exponential with unit rate.
  double exponential() { return -std::log(uniform()); }

  bool operator==(const RngStream& o) const {
    return state_ == o.state_ && gamma_ == o.gamma_;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
  std::uint64_t gamma_;
};

}  // namespace pggibbs
