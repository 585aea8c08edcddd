#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace recsteal {

// Deterministic RNG front-end. mt19937_64 produces a portable bit stream;
// the bounded/real draws below avoid std::uniform_*_distribution, whose
// output is implementation-defined and would break cross-toolchain
// reproducibility of experiment results.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0, n). n must be positive.
  int uniform_int(int n) {
    const std::uint64_t un = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return static_cast<int>(x % un);
  }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal, Box-Muller. Two draws per call, no cached spare.
  double normal();

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
      std::swap(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(uniform_int(i + 1))]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

// Stable derivation of independent sub-stream seeds from one base seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt);

// Salt constants for the deterministic seed tree.
namespace seed_salt {
inline constexpr std::uint64_t kInit = 1;
inline constexpr std::uint64_t kTrain = 2;
inline constexpr std::uint64_t kFinetune = 3;
inline constexpr std::uint64_t kSplit = 4;
inline constexpr std::uint64_t kHoldout = 5;
inline constexpr std::uint64_t kAvailable = 6;
inline constexpr std::uint64_t kAuxSample = 7;
inline constexpr std::uint64_t kTargetTrain = 8;
inline constexpr std::uint64_t kAuxTrain = 9;
inline constexpr std::uint64_t kCloneTrain = 10;
inline constexpr std::uint64_t kDefense = 11;
inline constexpr std::uint64_t kOverlap = 12;
inline constexpr std::uint64_t kQueryUsers = 13;
inline constexpr std::uint64_t kDefenseEval = 14;
}  // namespace seed_salt

}  // namespace recsteal
