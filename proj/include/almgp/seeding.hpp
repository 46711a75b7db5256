#pragma once

#include <cstdint>

namespace almgp {

/// Independent stream seeds derived from one run seed (splitmix64 mixing),
/// so design, noise, initialisation and random acquisition never share a
/// generator.
enum class SeedStage : std::uint64_t {
    initial_design = 1,
    test_design = 2,
    candidate_design = 3,
    reference_design = 4,
    label_noise = 5,
    model_init = 6,
    random_acquisition = 7,
    acquisition_noise = 8,
};

constexpr std::uint64_t stage_seed(std::uint64_t seed, SeedStage stage) noexcept {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(stage) + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace almgp
