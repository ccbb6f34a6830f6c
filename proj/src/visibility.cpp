#include "forge/visibility.hpp"

#include <algorithm>
#include <sstream>

#include "forge/error.hpp"

namespace forge {

Resolution visibility_resolution(Resolution full) noexcept {
    return {std::max(16, full.width / 4), std::max(16, full.height / 4)};
}

VisibilityResult ensure_visibility(const SceneSpec& source, const SceneSpec& target, std::uint16_t instance_id,
                                   const SamplerConfig& config) {
    const bool in_source = source.find(instance_id) != nullptr;
    const bool in_target = target.find(instance_id) != nullptr;
    if (!in_source && !in_target)
        throw VisibilityError("ensure_visibility: object " + std::to_string(instance_id) + " is in neither scene");

    RenderSettings rs;
    rs.resolution = visibility_resolution(config.resolution);
    rs.samples_per_pixel = 1;
    // Pixel counts are measured at reduced resolution, so the threshold
    // stays a fraction of the frame.
    const double threshold = config.visibility_threshold();

    VisibilityResult out;
    out.camera = source.camera;
    SceneSpec a = source, b = target;
    for (int step = 0; step <= config.max_pullback_steps; ++step) {
        a.camera = out.camera;
        b.camera = out.camera;
        out.source_fraction = in_source ? visible_fraction(render_mask_only(a, rs), instance_id) : 1.0;
        out.target_fraction = in_target ? visible_fraction(render_mask_only(b, rs), instance_id) : 1.0;
        out.steps = step;
        if (out.source_fraction >= threshold && out.target_fraction >= threshold) return out;
        if (step == config.max_pullback_steps) break;
        out.camera.position = out.camera.target + (out.camera.position - out.camera.target) * config.pullback_factor;
    }
    std::ostringstream msg;
    msg << "object " << instance_id << " stays below the visibility threshold " << threshold << " after "
        << config.max_pullback_steps << " pull-back steps (source " << out.source_fraction << ", target "
        << out.target_fraction << ")";
    throw VisibilityError(msg.str());
}

}  // namespace forge
