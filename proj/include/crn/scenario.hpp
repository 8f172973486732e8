#pragma once
#include <filesystem>

#include "crn/config.hpp"
#include "crn/types.hpp"

namespace crn {

// Draws a full instance from the config: gains h = Y * d^-beta with Rayleigh
// Y and uniform d, cross gains by the same model scaled by cross_gain_scale,
// per-SU sensing performance fused k-out-of-n at the FC, and the FC
// availability decision (or the configured evenly spaced set). Deterministic
// under the seed; SU i consumes substream i and the channel-level draws use
// substream K (see rng.hpp for the substream rule).
Scenario generate_scenario(const ScenarioConfig& config);

// Scenario instance files (JSON).
void write_scenario(const Scenario& scenario,
                    const std::filesystem::path& path);
Scenario read_scenario(const std::filesystem::path& path);

}  // namespace crn
