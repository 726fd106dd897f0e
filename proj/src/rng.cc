#include "knnicl/rng.h"

#include <cmath>
#include <numbers>

namespace knnicl {

double Rng::next_normal() {
  if (spare_normal_) {
    double v = *spare_normal_;
    spare_normal_.reset();
    return v;
  }
  double u1 = next_double_open();
  double u2 = next_double();
  double radius = std::sqrt(-2.0 * std::log(u1));
  double angle = 2.0 * std::numbers::pi * u2;
  spare_normal_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

std::uint64_t Rng::next_below(std::uint64_t n) {
  if (n == 0) return 0;
  unsigned __int128 wide = static_cast<unsigned __int128>(next_u64());
  return static_cast<std::uint64_t>((wide * n) >> 64);
}

long Rng::next_binomial(long trials, double p) {
  long hits = 0;
  for (long i = 0; i < trials; ++i) {
    if (next_bernoulli(p)) ++hits;
  }
  return hits;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view text, std::uint64_t h) {
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view text) {
  return fnv1a(text, 14695981039346656037ULL);
}

std::uint64_t derive_seed(std::uint64_t root, std::string_view label) {
  return splitmix64(root ^ fnv1a(label, 14695981039346656037ULL));
}

std::uint64_t derive_seed(std::uint64_t root, std::string_view label,
                          std::uint64_t index) {
  return splitmix64(derive_seed(root, label) ^ splitmix64(index));
}

std::uint64_t derive_seed(std::uint64_t root, std::string_view label,
                          std::uint64_t index, std::string_view key) {
  return splitmix64(derive_seed(root, label, index) ^
                    fnv1a(key, 14695981039346656037ULL));
}

}  // namespace knnicl
