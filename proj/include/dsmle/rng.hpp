#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>

namespace dsmle::rng {

/// splitmix64 finalizer. Used both to expand seeds into engine state and as
/// the documented child-seed derivation for parallel work items.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Child seed for work item `index` under a base seed. Every parallel or
/// replicated computation in the library derives per-item seeds through this
/// function, so results never depend on scheduling order or thread count.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return mix64(seed + 0x9E3779B97F4A7C15ull * (index + 1));
}

/// xoshiro256++ with deterministic, platform-independent sampling helpers.
/// Standard-library distributions are avoided on purpose: their output is
/// implementation-defined and would break the byte-reproducibility contract.
class Engine {
  public:
    explicit Engine(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) {
            sm += 0x9E3779B97F4A7C15ull;
            w = mix64(sm);
        }
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
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

    /// Uniform on [0,1) with 53 random bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller (deterministic; caches the spare value).
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_unit();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.141592653589793238462643383279502884 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Centered Laplace draw with the given scale, by inverse CDF.
    double next_laplace(double scale) {
        const double u = next_unit() - 0.5;
        double t = 1.0 - 2.0 * std::fabs(u);
        if (t <= 0.0) t = 0x1.0p-53;
        const double mag = -scale * std::log(t);
        return u < 0.0 ? -mag : mag;
    }

    /// Index draw from a probability vector by CDF inversion.
    int next_categorical(std::span<const double> probs) {
        const double u = next_unit();
        double acc = 0.0;
        int last_positive = 0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            if (probs[i] > 0.0) last_positive = static_cast<int>(i);
            acc += probs[i];
            if (u < acc) return static_cast<int>(i);
        }
        return last_positive;  // guards against rounding in the CDF
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> s_{};
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace dsmle::rng
