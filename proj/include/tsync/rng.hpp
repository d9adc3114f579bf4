#pragma once

#include <cmath>
#include <cstdint>

namespace tsync {

/// SplitMix64 (Steele, Lea, Flood 2014). Eight bytes of state, so events can
/// carry a copy of the post-draw generator cheaply. Streams for replica r are
/// derived with `Rng::stream(master, r)`.
///
/// Variate conversions are written out here rather than taken from <random>
/// because the standard distributions are implementation-defined and the
/// simulator promises identical trajectories on every platform.
class Rng {
public:
    constexpr explicit Rng(std::uint64_t seed = 0) noexcept : state_(seed) {}

    constexpr std::uint64_t next() noexcept
    {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    /// Uniform on [0, 1) with 53 random bits.
    constexpr double uniform() noexcept
    {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    /// Exponential with the given rate; never returns 0.
    double exponential(double rate) noexcept
    {
        // 1 - uniform() lies in (0, 1]
        const double u = 1.0 - uniform();
        const double w = -std::log(u) / rate;
        return w > 0.0 ? w : 0x1.0p-1074;
    }

    /// Uniform integer on [0, n), Lemire's multiply-shift with rejection.
    std::uint64_t below(std::uint64_t n) noexcept
    {
        __extension__ using u128 = unsigned __int128;
        u128 m = static_cast<u128>(next()) * n;
        auto low = static_cast<std::uint64_t>(m);
        if (low < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (low < threshold) {
                m = static_cast<u128>(next()) * n;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Standard normal via Box-Muller (one value per call, the sine branch is dropped).
    double normal() noexcept
    {
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    static constexpr Rng stream(std::uint64_t master, std::uint64_t index) noexcept
    {
        return Rng(mix(master ^ mix(index + 0x632be59bd9b4e019ULL)));
    }

    constexpr std::uint64_t state() const noexcept { return state_; }

    friend constexpr bool operator==(const Rng&, const Rng&) = default;

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept
    {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

} // namespace tsync
