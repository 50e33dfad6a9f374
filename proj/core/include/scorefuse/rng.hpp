#ifndef SCOREFUSE_RNG_HPP
#define SCOREFUSE_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>

#include <Eigen/Dense>

namespace scorefuse {

// Stream key tags. Every consumer of randomness derives its own stream from
// the run seed plus a tag path, so results do not depend on evaluation order.
enum class StreamTag : std::uint64_t {
  kInitNoise = 1,
  kRollback = 2,
  kCondition = 3,
  kPerturb = 4,
  kModel = 5,
  kScenario = 6,
};

namespace detail {
// splitmix64 finalizer (Steele, Lea & Flood 2014 / Vigna).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t combine(std::uint64_t h, std::uint64_t v) {
  return mix64(h ^ mix64(v + 0x165667b19e3779f9ULL));
}
}  // namespace detail

// Counter-based stream: the i-th output is a pure function of (key, i).
class Stream {
 public:
  explicit Stream(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64() { return detail::mix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  // Uniform in the open interval (0, 1).
  double next_double() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller (cosine branch; two uniforms per draw).
  double next_normal() {
    double u1 = next_double();
    double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  Eigen::VectorXd normal_vector(Eigen::Index n) {
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z[i] = next_normal();
    return z;
  }

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Root of the stream tree for one seeded run.
class RngRoot {
 public:
  explicit RngRoot(std::uint64_t seed) : seed_(detail::mix64(seed)) {}

  template <typename... Parts>
  Stream stream(StreamTag tag, Parts... parts) const {
    std::uint64_t h = detail::combine(seed_, static_cast<std::uint64_t>(tag));
    ((h = detail::combine(h, static_cast<std::uint64_t>(parts))), ...);
    return Stream(h);
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

}  // namespace scorefuse

#endif  // SCOREFUSE_RNG_HPP
