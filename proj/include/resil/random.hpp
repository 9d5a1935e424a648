#pragma once

#include <cstdint>
#include <limits>

namespace resil {

/// Seed for one trial of an experiment. The per-trial stream depends only on
/// (master, trial_index).
struct RandomSeed {
    std::uint64_t master = 0;
    std::uint64_t trial_index = 0;

    friend bool operator==(const RandomSeed&, const RandomSeed&) = default;
};

/// The splitmix64 output finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derived 64-bit seed for a trial:
///   mix(master + (trial_index + 1) * 0x9e3779b97f4a7c15)
/// with mix the splitmix64 finalizer. Fixed; changing it changes every
/// recorded experiment.
constexpr std::uint64_t derive_trial_seed(const RandomSeed& seed) noexcept {
    return splitmix64_mix(seed.master + (seed.trial_index + 1) * 0x9e3779b97f4a7c15ULL);
}

/// splitmix64 generator. Satisfies UniformRandomBitGenerator.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit constexpr SplitMix64(std::uint64_t state) noexcept : state_(state) {}
    explicit constexpr SplitMix64(const RandomSeed& seed) noexcept : state_(derive_trial_seed(seed)) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept {
        state_ += 0x9e3779b97f4a7c15ULL;
        return splitmix64_mix(state_);
    }

    /// Uniform integer in [0, bound) by rejection; bound > 0.
    constexpr std::uint64_t below(std::uint64_t bound) noexcept {
        const std::uint64_t limit = max() - max() % bound;
        std::uint64_t x;
        do {
            x = (*this)();
        } while (x >= limit);
        return x % bound;
    }

private:
    std::uint64_t state_;
};

} // namespace resil
