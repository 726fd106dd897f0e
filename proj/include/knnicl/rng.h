#ifndef KNNICL_RNG_H_
#define KNNICL_RNG_H_

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

namespace knnicl {

// Deterministic random source. All mappings from raw mt19937_64 output are
// implemented here rather than through std distributions, whose algorithms
// are implementation-defined; this keeps byte-identical results across
// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in (0, 1]; never zero, safe as a log argument.
  double next_double_open() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller, pairs cached.
  double next_normal();

  double next_normal(double mean, double stddev) {
    return mean + stddev * next_normal();
  }

  // Uniform integer in [0, n). Multiply-shift mapping; bias is negligible
  // for n far below 2^64.
  std::uint64_t next_below(std::uint64_t n);

  bool next_bernoulli(double p) { return next_double() < p; }

  long next_binomial(long trials, double p);

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
  std::optional<double> spare_normal_;
};

// FNV-1a over the bytes of `text`, starting from the standard offset basis.
std::uint64_t fnv1a64(std::string_view text);

// Named seed derivation: every consumer of randomness pulls a sub-seed from
// the root seed plus a purpose label, so components can be re-run in
// isolation without disturbing each other.
std::uint64_t derive_seed(std::uint64_t root, std::string_view label);
std::uint64_t derive_seed(std::uint64_t root, std::string_view label,
                          std::uint64_t index);
std::uint64_t derive_seed(std::uint64_t root, std::string_view label,
                          std::uint64_t index, std::string_view key);

}  // namespace knnicl

#endif  // KNNICL_RNG_H_
