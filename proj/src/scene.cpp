#include "forge/scene.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "forge/error.hpp"

namespace forge {

std::vector<Vec3> PlacedObject::world_vertices() const {
    std::vector<Vec3> out;
    out.reserve(asset->canonical_mesh.vertices.size());
    for (const auto& v : asset->canonical_mesh.vertices) out.push_back(to_world(v));
    return out;
}

Vec3 PlacedObject::world_center_of_mass() const {
    // Center of mass is equivariant under rigid motion and uniform scale.
    return to_world(asset->canonical_com);
}

Footprint compute_footprint(const PlacedObject& object) {
    const auto verts = object.world_vertices();
    return footprint_of(verts);
}

namespace {

// Unit-scale footprint of the settled asset turned by theta, centered
// wherever the canonical frame puts it.
Footprint unit_footprint(const AssetRecord& asset, const Quat& rotation) {
    Aabb box;
    for (const auto& v : asset.canonical_mesh.vertices) box.grow(rotation.rotate(v));
    return {{0.5 * (box.lo.x + box.hi.x), 0.5 * (box.lo.y + box.hi.y)},
            {0.5 * (box.hi.x - box.lo.x), 0.5 * (box.hi.y - box.lo.y)}};
}

PlacedObject place_with(std::shared_ptr<const AssetRecord> asset, const Quat& rotation, const Footprint& unit,
                        double scale, Vec2 center, std::uint16_t instance_id) {
    PlacedObject obj;
    obj.pose.rotation = rotation;
    obj.pose.translation = {center.x - scale * unit.center.x, center.y - scale * unit.center.y,
                            scale * asset->resting_pose->z_offset};
    obj.uniform_scale = scale;
    obj.footprint = {center, unit.half_extents * scale};
    obj.instance_id = instance_id;
    obj.asset = std::move(asset);
    return obj;
}

}  // namespace

PlacedObject place_asset(std::shared_ptr<const AssetRecord> asset, double z_rotation_deg, double scale, Vec2 center,
                         std::uint16_t instance_id) {
    if (!asset || !asset->resting_pose) throw Error("place_asset: asset has no resting pose");
    if (!(scale > 0)) throw Error("place_asset: scale must be positive");
    const Quat rotation = (Quat::rot_z(deg_to_rad(z_rotation_deg)) * asset->resting_pose->rotation).normalized();
    const Footprint unit = unit_footprint(*asset, rotation);
    return place_with(std::move(asset), rotation, unit, scale, center, instance_id);
}

const PlacedObject* SceneSpec::find(std::uint16_t instance_id) const noexcept {
    for (const auto& o : objects)
        if (o.instance_id == instance_id) return &o;
    return nullptr;
}

void SamplerConfig::validate() const {
    auto range = [](double lo, double hi, const char* what) {
        if (!(lo <= hi)) throw Error(std::string("sampler config: inverted range for ") + what);
    };
    range(elevation_min_deg, elevation_max_deg, "elevation");
    range(azimuth_min_deg, azimuth_max_deg, "azimuth");
    range(distance_min, distance_max, "distance");
    range(directional_min, directional_max, "directional intensity");
    range(scale_min, scale_max, "scale");
    if (!(elevation_min_deg > 0 && elevation_max_deg < 90)) throw Error("sampler config: elevation must lie in (0, 90)");
    if (!(distance_min > 0)) throw Error("sampler config: distance must be positive");
    if (!(scale_min > 0)) throw Error("sampler config: scale must be positive");
    if (!(light_cone_deg >= 0 && light_cone_deg < 90)) throw Error("sampler config: light cone must lie in [0, 90)");
    if (min_objects < 0 || max_objects < min_objects || max_objects > 64)
        throw Error("sampler config: object count range is invalid");
    if (max_attempts < 1) throw Error("sampler config: max_attempts must be >= 1");
    if (!(placement_half_extent > 0 && plane_half_extent > 0)) throw Error("sampler config: extents must be positive");
    if (!(pullback_factor > 1) || max_pullback_steps < 0) throw Error("sampler config: invalid pull-back settings");
    if (resolution.width <= 0 || resolution.height <= 0) throw Error("sampler config: resolution must be positive");
}

double SamplerConfig::visibility_threshold() const noexcept {
    const double pixels = static_cast<double>(resolution.width) * resolution.height;
    return std::max(visibility_fraction, visibility_min_pixels / pixels);
}

double size_ratio(std::span<const Footprint> footprints) noexcept {
    if (footprints.empty()) return 1.0;
    double lo = 1e300, hi = 0;
    for (const auto& f : footprints) {
        lo = std::min(lo, f.longest_side());
        hi = std::max(hi, f.longest_side());
    }
    return lo / hi;
}

bool overlaps_any(const SceneSpec& scene, const Footprint& candidate, int ignore_id) {
    const Circle c = circumcircle(candidate);
    for (const auto& o : scene.objects) {
        if (o.instance_id == ignore_id) continue;
        if (circles_intersect(c, circumcircle(o.footprint))) return true;
    }
    return false;
}

std::vector<PlacedObject> sample_layout(const Catalog& catalog, const CategorySplit& split, Membership membership,
                                        const SamplerConfig& config, Rng& rng) {
    if (catalog.assets().empty()) throw Error("sample_layout: catalog is empty");
    long overlap_rejections = 0, ratio_rejections = 0;
    int attempts = 0;
    const double ext = config.placement_half_extent;

    // n is fixed before any rejection so restarts cannot bias the count
    // toward small layouts.
    const int span = config.max_objects - config.min_objects + 1;
    const int n = config.min_objects + static_cast<int>(rng.below(static_cast<std::uint64_t>(span)));

    while (attempts < config.max_attempts) {
        std::vector<PlacedObject> layout;
        std::vector<Footprint> footprints;
        bool restart = false;

        for (int k = 0; k < n && !restart; ++k) {
            auto asset = sample_asset(catalog, split, membership, std::nullopt, rng);
            const double theta = rng.uniform(0, 360);
            const Quat rotation = (Quat::rot_z(deg_to_rad(theta)) * asset->resting_pose->rotation).normalized();
            const Footprint unit = unit_footprint(*asset, rotation);
            const double unit_side = unit.longest_side();

            bool placed = false;
            while (!placed && attempts < config.max_attempts) {
                ++attempts;
                const double side = rng.uniform(config.scale_min, config.scale_max);
                const Vec2 center{rng.uniform(-ext, ext), rng.uniform(-ext, ext)};
                const Footprint fp{center, unit.half_extents * (side / unit_side)};
                const Circle circle = circumcircle(fp);
                bool hit = false;
                for (const auto& other : footprints) hit = hit || circles_intersect(circle, circumcircle(other));
                if (hit) {
                    ++overlap_rejections;
                    continue;
                }
                footprints.push_back(fp);
                if (size_ratio(footprints) <= config.min_size_ratio) {
                    ++ratio_rejections;
                    restart = true;
                    break;
                }
                layout.push_back(place_with(asset, rotation, unit, side / unit_side, center,
                                            static_cast<std::uint16_t>(2 + k)));
                placed = true;
            }
            if (!placed) restart = true;
        }
        if (!restart) return layout;
    }

    std::ostringstream msg;
    msg << "sample_layout: gave up after " << attempts << " footprint draws (overlap rejections: "
        << overlap_rejections << ", size-ratio rejections: " << ratio_rejections << "; dominant: "
        << (overlap_rejections >= ratio_rejections ? "circumcircle overlap" : "size ratio") << ")";
    throw ExhaustionError(msg.str());
}

Camera sample_camera(const SamplerConfig& config, Rng& rng) {
    const double elevation = deg_to_rad(rng.uniform(config.elevation_min_deg, config.elevation_max_deg));
    const double azimuth = deg_to_rad(rng.uniform(config.azimuth_min_deg, config.azimuth_max_deg));
    const double distance = rng.uniform(config.distance_min, config.distance_max);
    Camera cam;
    cam.position = Vec3{std::cos(elevation) * std::cos(azimuth), std::cos(elevation) * std::sin(azimuth),
                        std::sin(elevation)} *
                   distance;
    cam.target = {0, 0, 0};
    cam.up = {0, 0, 1};
    cam.vertical_fov_deg = config.fov_deg;
    cam.resolution = config.resolution;
    return cam;
}

namespace {

Vec3 toward(double azimuth_deg, double elevation_deg) {
    const double az = deg_to_rad(azimuth_deg), el = deg_to_rad(elevation_deg);
    return {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)};
}

}  // namespace

void aim_rig(LightingRig& rig, const Camera& camera) {
    const double cam_az = camera_azimuth_deg(camera);
    for (RigLight* l : {&rig.key, &rig.fill, &rig.back})
        l->light.direction = -toward(cam_az + l->azimuth_offset_deg, l->elevation_deg);
}

LightingRig sample_lighting(const SamplerConfig& config, const Camera& camera, const Catalog& catalog, Rng& rng) {
    LightingRig rig;
    const double cos_max = std::cos(deg_to_rad(config.light_cone_deg));
    const double cos_t = 1.0 - rng.uniform() * (1.0 - cos_max);
    const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
    const double phi = 2 * kPi * rng.uniform();
    rig.directional.direction = {sin_t * std::cos(phi), sin_t * std::sin(phi), -cos_t};
    rig.directional.intensity = rng.uniform(config.directional_min, config.directional_max);
    rig.directional.casts_shadow = true;

    const auto& r = config.rig;
    rig.key = {r.key_azimuth_deg, r.key_elevation_deg, {{}, r.key_intensity, {1, 1, 1}, true}};
    rig.fill = {r.fill_azimuth_deg, r.fill_elevation_deg, {{}, r.key_intensity * r.fill_ratio, {1, 1, 1}, false}};
    rig.back = {r.back_azimuth_deg, r.back_elevation_deg, {{}, r.key_intensity * r.back_ratio, {1, 1, 1}, true}};
    aim_rig(rig, camera);

    const auto& envs = catalog.env_lights();
    if (!envs.empty()) {
        const auto& env = envs[rng.below(envs.size())];
        rig.env_id = env.id;
        rig.ambient = env.ambient_term();
    }
    return rig;
}

SceneSpec sample_scene(const Catalog& catalog, const CategorySplit& split, Membership membership,
                       const SamplerConfig& config, Rng& rng) {
    SceneSpec scene;
    scene.seed = rng.key();
    Rng layout_rng = rng.derive("layout");
    Rng camera_rng = rng.derive("camera");
    Rng light_rng = rng.derive("lighting");
    Rng floor_rng = rng.derive("floor");
    scene.objects = sample_layout(catalog, split, membership, config, layout_rng);
    scene.camera = sample_camera(config, camera_rng);
    scene.lighting = sample_lighting(config, scene.camera, catalog, light_rng);
    const auto& floors = catalog.floors();
    if (!floors.empty()) scene.floor_id = floors[floor_rng.below(floors.size())].id;
    scene.plane_half_extent = config.plane_half_extent;
    return scene;
}

std::vector<std::string> audit_scene(const SceneSpec& scene, const SamplerConfig& config, AuditLevel level) {
    std::vector<std::string> issues;
    const int n = static_cast<int>(scene.objects.size());
    if (level == AuditLevel::Sampled && (n < config.min_objects || n > config.max_objects))
        issues.push_back("object count " + std::to_string(n) + " outside the sampled range");
    if (level == AuditLevel::Edited && n > 4) issues.push_back("more than four objects");

    try {
        validate_camera(scene.camera);
    } catch (const GeometryError& e) {
        issues.push_back(e.what());
    }
    if (level == AuditLevel::Sampled) {
        const double el = camera_elevation_deg(scene.camera);
        if (el < config.elevation_min_deg - 1e-9 || el > config.elevation_max_deg + 1e-9)
            issues.push_back("camera elevation " + std::to_string(el) + " outside the configured range");
        if (std::abs(length(scene.camera.target)) > 0) issues.push_back("camera does not aim at the origin");
    }

    std::set<std::uint16_t> ids;
    std::vector<Footprint> footprints;
    for (const auto& o : scene.objects) {
        const std::string name = "object " + std::to_string(o.instance_id);
        if (o.instance_id < 2) issues.push_back(name + ": instance id below 2");
        if (!ids.insert(o.instance_id).second) issues.push_back(name + ": duplicate instance id");
        if (!o.pose.valid()) issues.push_back(name + ": rotation is not a unit quaternion");
        const auto verts = o.world_vertices();
        double min_z = 1e300;
        for (const auto& v : verts) min_z = std::min(min_z, v.z);
        if (std::abs(min_z) > 1e-9) issues.push_back(name + ": not in contact with the ground");
        const Footprint actual = footprint_of(verts);
        if (length(actual.center - o.footprint.center) > 1e-6 ||
            length(actual.half_extents - o.footprint.half_extents) > 1e-6)
            issues.push_back(name + ": stored footprint does not match the posed mesh");
        footprints.push_back(o.footprint);
    }
    for (std::size_t i = 0; i < scene.objects.size(); ++i)
        for (std::size_t j = i + 1; j < scene.objects.size(); ++j)
            if (circles_intersect(circumcircle(scene.objects[i].footprint), circumcircle(scene.objects[j].footprint)))
                issues.push_back("objects " + std::to_string(scene.objects[i].instance_id) + " and " +
                                 std::to_string(scene.objects[j].instance_id) + " have intersecting circumcircles");
    if (level == AuditLevel::Sampled && size_ratio(footprints) <= config.min_size_ratio)
        issues.push_back("size ratio " + std::to_string(size_ratio(footprints)) + " not above the minimum");
    return issues;
}

}  // namespace forge
