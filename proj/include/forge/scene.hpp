#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "forge/catalog.hpp"
#include "forge/geometry.hpp"
#include "forge/rng.hpp"

namespace forge {

/// An asset instance in a scene.
///
/// world = pose.rotation * (uniform_scale * canonical) + pose.translation,
/// where pose.rotation = Rz(theta) * resting rotation and
/// pose.translation.z = uniform_scale * resting z_offset.
struct PlacedObject {
    std::shared_ptr<const AssetRecord> asset;
    RigidPose pose;
    double uniform_scale = 1.0;
    Footprint footprint;
    std::uint16_t instance_id = 2;

    Vec3 to_world(Vec3 local) const noexcept { return pose.apply(local * uniform_scale); }
    std::vector<Vec3> world_vertices() const;
    Vec3 world_center_of_mass() const;

    friend bool operator==(const PlacedObject& a, const PlacedObject& b) {
        return a.asset == b.asset && a.pose == b.pose && a.uniform_scale == b.uniform_scale &&
               a.footprint == b.footprint && a.instance_id == b.instance_id;
    }
};

/// Builds a placed object: resting pose, then a counter-clockwise turn
/// about +z, then uniform scale, with the footprint centered at `center`.
PlacedObject place_asset(std::shared_ptr<const AssetRecord> asset, double z_rotation_deg, double scale, Vec2 center,
                         std::uint16_t instance_id);

/// x-y bounds of the posed mesh.
Footprint compute_footprint(const PlacedObject& object);

/// A light infinitely far away. `direction` is the direction the light
/// travels (pointing away from the light).
struct DirectionalLight {
    Vec3 direction{0, 0, -1};
    double intensity = 1.0;
    Vec3 color{1, 1, 1};
    bool casts_shadow = true;

    friend bool operator==(const DirectionalLight&, const DirectionalLight&) = default;
};

/// One light of the camera-relative three-point rig. The azimuth is an
/// offset from the camera azimuth; the elevation is above the ground plane.
struct RigLight {
    double azimuth_offset_deg = 0;
    double elevation_deg = 45;
    DirectionalLight light;

    friend bool operator==(const RigLight&, const RigLight&) = default;
};

struct LightingRig {
    DirectionalLight directional;
    RigLight key, fill, back;
    std::string env_id;
    Vec3 ambient{0.2, 0.2, 0.2};  // resolved from the env light

    friend bool operator==(const LightingRig&, const LightingRig&) = default;
};

struct SceneSpec {
    std::vector<PlacedObject> objects;
    std::string floor_id;
    double plane_half_extent = 4.0;  // textured area is [-e, e]^2; the plane itself is unbounded
    LightingRig lighting;
    Camera camera;
    std::uint64_t seed = 0;

    const PlacedObject* find(std::uint16_t instance_id) const noexcept;
    friend bool operator==(const SceneSpec&, const SceneSpec&) = default;
};

struct RigConfig {
    double key_azimuth_deg = 45, key_elevation_deg = 45, key_intensity = 0.55;
    double fill_azimuth_deg = -45, fill_elevation_deg = 20, fill_ratio = 0.4;
    double back_azimuth_deg = 180, back_elevation_deg = 45, back_ratio = 0.6;
};

struct SamplerConfig {
    double elevation_min_deg = 40, elevation_max_deg = 80;
    double azimuth_min_deg = 0, azimuth_max_deg = 360;
    double distance_min = 6, distance_max = 9;
    double fov_deg = 50;
    Resolution resolution{256, 256};

    double light_cone_deg = 25;
    double directional_min = 1.0, directional_max = 1.5;
    RigConfig rig;

    int min_objects = 1, max_objects = 4;
    double min_size_ratio = 0.8;
    double placement_half_extent = 2.5;
    double plane_half_extent = 4.0;
    double scale_min = 0.6, scale_max = 1.6;  // sampled longest footprint side
    int max_attempts = 2000;

    double visibility_fraction = 0.01;
    double visibility_min_pixels = 25;
    double pullback_factor = 1.15;
    int max_pullback_steps = 20;

    /// Throws Error when a range is inverted or a count is out of bounds.
    void validate() const;
    /// Fraction of image pixels the edited object must cover.
    double visibility_threshold() const noexcept;
};

/// Places n ~ uniform{min_objects..max_objects} assets by rejection
/// sampling: footprints whose circumcircles intersect an accepted one are
/// redrawn, and the whole layout is redrawn when the ratio of the smallest
/// to the largest longest-side falls to min_size_ratio or below.
/// Throws ExhaustionError (naming the dominant constraint) after
/// max_attempts footprint draws.
std::vector<PlacedObject> sample_layout(const Catalog& catalog, const CategorySplit& split, Membership membership,
                                        const SamplerConfig& config, Rng& rng);

Camera sample_camera(const SamplerConfig& config, Rng& rng);

/// Camera-relative rig directions for the given camera.
void aim_rig(LightingRig& rig, const Camera& camera);

LightingRig sample_lighting(const SamplerConfig& config, const Camera& camera, const Catalog& catalog, Rng& rng);

/// Layout, camera, lighting and floor for one scene.
SceneSpec sample_scene(const Catalog& catalog, const CategorySplit& split, Membership membership,
                       const SamplerConfig& config, Rng& rng);

enum class AuditLevel {
    Sampled,  // every invariant of a freshly sampled scene
    Edited,   // edited scenes: 0..4 objects, contact and overlap only
};

/// Returns one message per violated invariant; empty when the scene is valid.
std::vector<std::string> audit_scene(const SceneSpec& scene, const SamplerConfig& config,
                                     AuditLevel level = AuditLevel::Sampled);

/// True when `candidate`'s circumcircle intersects any object's other than
/// the one with `ignore_id`.
bool overlaps_any(const SceneSpec& scene, const Footprint& candidate, int ignore_id = -1);

/// Smallest over largest longest-side across the given footprints.
double size_ratio(std::span<const Footprint> footprints) noexcept;

}  // namespace forge
