#pragma once

#include <cmath>
#include <cstdint>

namespace ucp::rng {

// splitmix64; used to expand a user seed into stream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256++ by Blackman & Vigna. Small, fast, and entirely
// self-contained so streams are reproducible across platforms.
class Xoshiro256 {
  public:
    explicit Xoshiro256(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    std::uint64_t next_u64() {
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

    // uniform in (0,1); never returns exactly 0 (safe under log()).
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // uniform in [-1,1)
    double next_symmetric() { return 2.0 * next_uniform() - 1.0; }

    // standard normal via the polar (Marsaglia) method with one cached value
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, q;
        do {
            u = next_symmetric();
            v = next_symmetric();
            q = u * u + v * v;
        } while (q >= 1.0 || q == 0.0);
        const double f = std::sqrt(-2.0 * std::log(q) / q);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Deterministic per-stream seeding: stream `index` under master `seed`
// gets an engine whose state is independent of all other indices.
inline Xoshiro256 stream(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t mix = seed ^ (0x6a09e667f3bcc909ULL + index * 0x9e3779b97f4a7c15ULL);
    std::uint64_t sm = mix;
    return Xoshiro256(splitmix64(sm));
}

} // namespace ucp::rng
