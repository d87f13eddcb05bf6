#pragma once

#include <cstdint>

#include "pntk/common.hpp"

namespace pntk {

// Counter-based pseudo-random generator. Every value is a pure function of
// (seed, stream, counter), so any draw in the project can be replayed without
// storing state: training step t, sample s, layer l map to a stream id and the
// in-matrix position maps to the counter. The mixing function is a double
// application of the splitmix64 finalizer, which is sufficient avalanche for
// Monte-Carlo work.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();

  // Uniform on (0,1), never returning an endpoint.
  double next_unit();

  // Standard normal via Box-Muller; generates pairs, caches the spare.
  double next_normal();

  // Standard normal conditioned on |z| <= cut, by rejection.
  double next_trunc_normal(double cut);

  // Fill column-major, one normal per entry, in storage order.
  void fill_normal(Matrix& out);
  void fill_trunc_normal(Matrix& out, double cut);

 private:
  std::uint64_t key_;
  std::uint64_t ctr_;
  double spare_;
  bool has_spare_;
};

// Combine up to three path components into a stream id. Distinct paths give
// distinct streams with overwhelming probability.
std::uint64_t stream_id(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

}  // namespace pntk
