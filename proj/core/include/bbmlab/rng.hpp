#pragma once

#include <cmath>
#include <cstdint>

namespace bbmlab {

// splitmix64: used for seeding and for deriving per-stream seeds.
struct SplitMix64 {
  std::uint64_t s;
  std::uint64_t next() {
    std::uint64_t z = (s += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
};

// xoshiro256++ with counter-based stream derivation: the generator for stream
// k of master seed m is a pure function of (m, k), so replica results do not
// depend on which worker thread runs them.  Includes a ziggurat sampler for
// the standard normal (hot path of the particle simulations).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) { reseed(seed); }
  Rng(std::uint64_t master, std::uint64_t stream) {
    SplitMix64 a{master};
    SplitMix64 b{stream ^ 0x6A09E667F3BCC909ULL};
    reseed(a.next() ^ (b.next() + 0x9E3779B97F4A7C15ULL * (stream + 1)));
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // uniform in [0,1) resp. (0,1] (the latter safe under log()).
  double uniform01() { return (next() >> 11) * 0x1.0p-53; }
  double uniform_pos() { return ((next() >> 11) + 1) * 0x1.0p-53; }

  double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

  double normal();

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  void reseed(std::uint64_t seed) {
    SplitMix64 sm{seed};
    for (auto& w : s_) w = sm.next();
  }
  std::uint64_t s_[4];
};

namespace detail {

// Marsaglia–Tsang ziggurat tables for the standard normal (128 layers).
struct ZigguratTables {
  std::uint32_t kn[128];
  double wn[128], fn[128];
  ZigguratTables() {
    const double m1 = 2147483648.0;  // 2^31
    double dn = 3.442619855899, tn = dn;
    const double vn = 9.91256303526217e-3;
    const double q = vn / std::exp(-0.5 * dn * dn);
    kn[0] = static_cast<std::uint32_t>((dn / q) * m1);
    kn[1] = 0;
    wn[0] = q / m1;
    wn[127] = dn / m1;
    fn[0] = 1.0;
    fn[127] = std::exp(-0.5 * dn * dn);
    for (int i = 126; i >= 1; --i) {
      dn = std::sqrt(-2.0 * std::log(vn / dn + std::exp(-0.5 * dn * dn)));
      kn[i + 1] = static_cast<std::uint32_t>((dn / tn) * m1);
      tn = dn;
      fn[i] = std::exp(-0.5 * dn * dn);
      wn[i] = dn / m1;
    }
  }
};

inline const ZigguratTables& ziggurat() {
  static const ZigguratTables t;
  return t;
}

}  // namespace detail

inline double Rng::normal() {
  const auto& z = detail::ziggurat();
  constexpr double r = 3.442619855899;
  for (;;) {
    const auto hz = static_cast<std::int32_t>(next() >> 32);
    const std::uint32_t iz = static_cast<std::uint32_t>(hz) & 127u;
    const std::uint32_t az =
        hz < 0 ? static_cast<std::uint32_t>(-static_cast<std::int64_t>(hz))
               : static_cast<std::uint32_t>(hz);
    if (az < z.kn[iz]) return hz * z.wn[iz];
    if (iz == 0) {  // tail beyond +-r
      double xx, yy;
      do {
        xx = -std::log(uniform_pos()) / r;
        yy = -std::log(uniform_pos());
      } while (yy + yy < xx * xx);
      return hz > 0 ? r + xx : -(r + xx);
    }
    const double x = hz * z.wn[iz];
    if (z.fn[iz] + uniform01() * (z.fn[iz - 1] - z.fn[iz]) <
        std::exp(-0.5 * x * x)) {
      return x;
    }
  }
}

}  // namespace bbmlab
