#pragma once

#include <cstdint>
#include <vector>

#include "forge/catalog.hpp"
#include "forge/geometry.hpp"
#include "forge/image.hpp"
#include "forge/scene.hpp"

namespace forge {

struct RenderSettings {
    Resolution resolution{256, 256};
    int samples_per_pixel = 4;  // stratified over a ceil(sqrt(n)) grid
    double gamma = 2.2;
    bool shadows = true;
    Vec3 background{0.58, 0.64, 0.72};  // linear

    // Light switches, mainly for analytic test scenes.
    bool ambient = true;
    bool directional = true;
    bool rig = true;

    // Jitter sub-pixel samples inside their strata; off puts every sample
    // at its stratum center.
    bool jitter = true;

    // OpenMP workers; 0 uses the runtime default. Output does not depend
    // on it.
    int threads = 0;

    /// Throws Error on a non-positive resolution, spp or gamma.
    void validate() const;
};

/// Linear radiance, row 0 at the top.
struct RadianceImage {
    int width = 0;
    int height = 0;
    std::vector<Vec3> pixels;

    const Vec3& at(int x, int y) const noexcept { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

struct RenderOutput {
    Image rgb;
    SegmentationMask mask;
};

/// Ray traces the scene: nearest hit over a BVH of all object triangles and
/// the unbounded textured plane z = 0, Lambertian direct lighting (ambient,
/// directional with a shadow ray, key and back with shadow rays, fill
/// without). The mask holds the label seen by the pixel-center ray.
/// Pure in (scene, floor texture, settings, seed).
RenderOutput render(const SceneSpec& scene, const Catalog& catalog, const RenderSettings& settings,
                    std::uint64_t seed);

RadianceImage render_radiance(const SceneSpec& scene, const Catalog& catalog, const RenderSettings& settings,
                              std::uint64_t seed);

/// Pixel-center labels only; identical to render(...).mask.
SegmentationMask render_mask_only(const SceneSpec& scene, const RenderSettings& settings);

/// Gamma encode with rounding to nearest, clamped to [0, 255].
Image encode_gamma(const RadianceImage& radiance, double gamma);

/// Share of pixels labeled `instance_id`.
double visible_fraction(const SegmentationMask& mask, std::uint16_t instance_id) noexcept;

namespace reference {

// Single-threaded, brute force over every triangle. Kept as the oracle
// for the parallel BVH path; results must match bit for bit.
RadianceImage render_radiance(const SceneSpec& scene, const Catalog& catalog, const RenderSettings& settings,
                              std::uint64_t seed);
SegmentationMask render_mask_only(const SceneSpec& scene, const RenderSettings& settings);

}  // namespace reference

}  // namespace forge
