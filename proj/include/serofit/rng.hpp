#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace serofit {

/// One step of the splitmix64 generator; also used as a mixing function
/// when deriving child streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// xoshiro256++ generator with deterministic stream derivation.
///
/// Streams are addressed by a master seed plus a path of integer ids
/// (replicate index, tempering level, ...). Each concurrent component of a
/// computation owns its own derived stream, so results are bit-identical
/// for any thread schedule. The generator and the distribution transforms
/// below are self-contained, which keeps seeded output stable across
/// standard-library versions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : s_) word = splitmix64(sm);
        // xoshiro state must not be all zero; splitmix output never is for
        // the four consecutive draws, but keep an explicit guard.
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
    }

    /// Seed of the stream identified by `path` under `seed`. Useful when a
    /// component needs a seed to derive its own sub-streams from.
    static std::uint64_t derive_seed(std::uint64_t seed,
                                     std::initializer_list<std::uint64_t> path) {
        std::uint64_t h = seed;
        for (std::uint64_t id : path) {
            std::uint64_t state = h ^ (id * 0xD1B54A32D192ED03ull + 0x8CB92BA72F3D8DD7ull);
            h = splitmix64(state);
        }
        return h;
    }

    /// Derive the stream identified by `path` under `seed`. Different paths
    /// give statistically independent streams; the same path always gives
    /// the same stream.
    static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
        return Rng(derive_seed(seed, path));
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

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via Box-Muller; the second value of each pair is
    /// cached, so draws remain a pure function of the stream state.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log1p(-u1));
        const double phi = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(phi);
        have_spare_ = true;
        return r * std::cos(phi);
    }

    /// Exponential with the given rate (mean 1/rate).
    double exponential(double rate) { return -std::log1p(-uniform01()) / rate; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace serofit
