#ifndef TFWM_KEYED_RNG_HPP
#define TFWM_KEYED_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace tfwm {

// SplitMix64 step; used to derive well-spread seeds from user keys.
inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t mix_key(std::uint64_t key, std::uint64_t index) {
  return splitmix64(splitmix64(key) ^ splitmix64(index + 0x243F6A8885A308D3ull));
}

// Deterministic keyed generator. mt19937_64 output is fully specified by the
// standard and the distributions below are hand-rolled, so identical keys give
// identical streams on every platform.
class KeyedRng {
public:
  explicit KeyedRng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // uniform in [0, 1)
  double next_unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // uniform in [0, bound), rejection sampled
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    std::uint64_t v = eng_();
    while (v >= limit) v = eng_();
    return v % bound;
  }

  int next_sign() { return (eng_() >> 63) ? 1 : -1; }

  // standard normal via Box-Muller
  double next_gauss() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - next_unit();  // (0, 1]
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace tfwm

#endif
