#include "pntk/rng.hpp"

#include <cmath>

namespace pntk {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline std::uint64_t splitmix_fin(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix3(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = splitmix_fin(a + kGolden);
  h = splitmix_fin(h ^ (b + kGolden + (h << 6) + (h >> 2)));
  h = splitmix_fin(h ^ (c + kGolden + (h << 6) + (h >> 2)));
  return h;
}

}  // namespace

std::uint64_t stream_id(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return mix3(a, b, c);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix3(seed, stream, 0x706E746BULL /* "pntk" */)),
      ctr_(0),
      spare_(0.0),
      has_spare_(false) {}

std::uint64_t CounterRng::next_u64() {
  return splitmix_fin(key_ + ctr_++ * kGolden);
}

double CounterRng::next_unit() {
  // 53 mantissa bits, shifted into (0,1): (x + 0.5) / 2^53.
  const std::uint64_t bits = next_u64() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double CounterRng::next_normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = next_unit();
  const double u2 = next_unit();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * M_PI * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

double CounterRng::next_trunc_normal(double cut) {
  // Acceptance is ~95.4% at cut=2; the loop terminates quickly in practice.
  for (;;) {
    const double z = next_normal();
    if (std::abs(z) <= cut) return z;
  }
}

void CounterRng::fill_normal(Matrix& out) {
  double* p = out.data();
  const auto sz = out.size();
  for (Eigen::Index i = 0; i < sz; ++i) p[i] = next_normal();
}

void CounterRng::fill_trunc_normal(Matrix& out, double cut) {
  double* p = out.data();
  const auto sz = out.size();
  for (Eigen::Index i = 0; i < sz; ++i) p[i] = next_trunc_normal(cut);
}

}  // namespace pntk
