#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "forge/catalog.hpp"
#include "forge/rng.hpp"
#include "forge/scene.hpp"

namespace forge {

enum class TaskKind { Translate, Rotate, Insert, Remove };

std::string_view to_string(TaskKind task) noexcept;
std::optional<TaskKind> task_kind_from_string(std::string_view name) noexcept;

/// One object-level edit. The payload fields that apply depend on `task`:
///   translate: target, dest
///   rotate:    target, angle_deg (counter-clockwise seen from above)
///   insert:    dest, category
///   remove:    target
struct EditSpec {
    TaskKind task = TaskKind::Rotate;
    std::optional<std::uint16_t> target;
    ImageCoord dest;
    double angle_deg = 0;
    std::string category;

    // Ground point behind `dest`; kept so the image coordinate can be
    // recomputed when the camera is pulled back.
    Vec2 ground;
    int template_index = 0;
    std::string instruction;

    friend bool operator==(const EditSpec&, const EditSpec&) = default;
};

/// Throws EditError when the payload does not match the task or is out of
/// range (angle outside (0, 360), coordinates outside [0, 1]^2).
void validate_edit(const EditSpec& edit);

struct EditConfig {
    double angle_min_deg = 15, angle_max_deg = 345;
    double placement_half_extent = 2.5;
    double scale_min = 0.6, scale_max = 1.6;
    double min_size_ratio = 0.8;
    int max_objects = 4;
    int max_insert_attempts = 64;
    int max_destination_attempts = 256;
    int max_rotation_attempts = 64;

    static EditConfig from_sampler(const SamplerConfig& sampler);
};

/// Moves the target so its footprint center sits on the ground point seen
/// at `dest`. Rotation, scale and contact are preserved. The new center
/// must lie in the placement extent and clear every other circumcircle.
SceneSpec apply_translation(const SceneSpec& scene, std::uint16_t target, ImageCoord dest, const EditConfig& config);

/// Turns the target about the vertical line through its center of mass.
/// Angles are reduced mod 360; a full turn returns the scene unchanged.
SceneSpec apply_rotation(const SceneSpec& scene, std::uint16_t target, double angle_deg, const EditConfig& config);

/// Samples an asset of `category` (restricted by membership), a heading and
/// a scale, and places it at the ground point seen at `dest`. Scale and
/// heading are redrawn until the layout constraints hold.
SceneSpec apply_insertion(const SceneSpec& scene, const std::string& category, ImageCoord dest,
                          const Catalog& catalog, const CategorySplit& split, Membership membership,
                          const EditConfig& config, Rng& rng);

/// Appends an already placed object under a fresh instance id (max + 1).
/// Enforces the object limit and the overlap test only.
SceneSpec insert_placed(const SceneSpec& scene, PlacedObject object, const EditConfig& config);

SceneSpec apply_removal(const SceneSpec& scene, std::uint16_t target);

/// Applies a fully specified edit. Insertion needs the catalog and rng;
/// the others ignore them.
SceneSpec apply_edit(const SceneSpec& scene, const EditSpec& edit, const Catalog& catalog,
                     const CategorySplit& split, Membership membership, const EditConfig& config, Rng& rng);

/// Number of paraphrase templates per task.
inline constexpr int kInstructionTemplates = 3;

/// Fills template `edit.template_index` with the target's description (or
/// the inserted category) and the payload at two decimals.
std::string make_instruction(const EditSpec& edit, const SceneSpec& scene);

struct SampledEdit {
    EditSpec edit;
    SceneSpec target;
};

/// Picks a target uniformly, samples the payload and applies it, retrying
/// destinations and angles that violate the layout rules. The instruction
/// is filled in. Throws ExhaustionError when no payload works.
SampledEdit sample_edit(const SceneSpec& scene, TaskKind task, const Catalog& catalog, const CategorySplit& split,
                        Membership membership, const EditConfig& config, Rng& rng);

/// Recomputes `dest` from `ground` for a new camera and refreshes the
/// instruction. Returns false when the point leaves the image.
bool reproject_edit(EditSpec& edit, const SceneSpec& scene, const Camera& camera);

}  // namespace forge
