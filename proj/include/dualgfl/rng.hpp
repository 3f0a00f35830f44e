#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

namespace dualgfl {

// Seeded random source shared by every stochastic step of a run.
//
// Boost.Random is used instead of <random> distributions because the latter
// are implementation-defined; Boost's are the same code on every platform, so
// a (config, seed) pair reproduces bit-identical output across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo = 0.0, double hi = 1.0) {
    return boost::random::uniform_real_distribution<double>(lo, hi)(engine_);
  }

  double normal(double mean = 0.0, double stddev = 1.0) {
    return boost::random::normal_distribution<double>(mean, stddev)(engine_);
  }

  double gamma(double shape) {
    return boost::random::gamma_distribution<double>(shape, 1.0)(engine_);
  }

  // Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    return boost::random::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

  // Derives an independent stream; the parent advances by one draw.
  Rng fork() { return Rng(splitmix(engine_())); }

  // Stream keyed by (seed, tag) without touching any existing engine.
  static Rng derive(std::uint64_t seed, std::uint64_t tag) {
    return Rng(splitmix(seed ^ splitmix(tag + 0x632be59bd9b4e019ULL)));
  }

 private:
  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  boost::random::mt19937_64 engine_;
};

}  // namespace dualgfl
