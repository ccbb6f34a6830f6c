#pragma once

#include <cstdint>
#include <optional>

#include "forge/render.hpp"
#include "forge/scene.hpp"

namespace forge {

struct VisibilityResult {
    Camera camera;
    int steps = 0;  // pull-back steps taken
    double source_fraction = 0;
    double target_fraction = 0;
};

/// Mask resolution used for visibility checks: a quarter of the full
/// resolution on each side, at least 16 pixels.
Resolution visibility_resolution(Resolution full) noexcept;

/// Pulls the camera back along its viewing ray (distance times
/// config.pullback_factor per step) until object `instance_id` covers at
/// least config.visibility_threshold() of the image in every scene where
/// it exists. `source` and `target` share the camera. Either may lack the
/// object (insertions, removals); at least one must contain it.
/// Throws VisibilityError after config.max_pullback_steps.
VisibilityResult ensure_visibility(const SceneSpec& source, const SceneSpec& target, std::uint16_t instance_id,
                                   const SamplerConfig& config);

}  // namespace forge
