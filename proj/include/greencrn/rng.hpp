#pragma once

#include <cstdint>
#include <limits>

namespace greencrn {

__extension__ using uint128 = unsigned __int128;

// Independent random streams. Every stochastic element of a run draws from a
// generator keyed by (seed, stream, entity, slot), so two controllers run on
// the same seed see identical occupancy, traffic, fading and sensing noise
// regardless of which draws each of them actually consumes.
enum class Stream : std::uint64_t {
    OccupancyInit = 1,
    Occupancy,
    Traffic,
    Sensing,
    Fading,
    Ris,
    PuLink,
    Harvest,
    Decision,
    Policy,
    Placement,
    Genetic,
    Slice,
    Init,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// xoshiro256** generator. Satisfies UniformRandomBitGenerator so it can feed
/// the standard distributions.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0) noexcept
    {
        std::uint64_t s = seed;
        for (auto& word : state_) {
            s = splitmix64(s);
            word = s;
        }
    }

    /// Generator for one (stream, entity, slot) cell of a seeded run.
    static Rng keyed(std::uint64_t seed, Stream stream, std::uint64_t entity = 0,
                     std::uint64_t slot = 0) noexcept
    {
        std::uint64_t k = splitmix64(seed);
        k = splitmix64(k ^ static_cast<std::uint64_t>(stream));
        k = splitmix64(k ^ (entity * 0xD1B54A32D192ED03ULL));
        k = splitmix64(k ^ (slot * 0xA24BAED4963EE407ULL));
        return Rng(k);
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept
    {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform on [0, 1).
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform integer on [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n) noexcept
    {
        // Lemire's multiply-shift; the tiny bias is irrelevant at our ranges.
        return static_cast<std::uint64_t>((static_cast<uint128>((*this)()) * n) >> 64);
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept
    {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4]{};
};

} // namespace greencrn
