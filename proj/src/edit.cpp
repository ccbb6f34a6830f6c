#include "forge/edit.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "forge/error.hpp"

namespace forge {

std::string_view to_string(TaskKind task) noexcept {
    switch (task) {
        case TaskKind::Translate: return "translate";
        case TaskKind::Rotate: return "rotate";
        case TaskKind::Insert: return "insert";
        case TaskKind::Remove: return "remove";
    }
    return "?";
}

std::optional<TaskKind> task_kind_from_string(std::string_view name) noexcept {
    for (TaskKind t : {TaskKind::Translate, TaskKind::Rotate, TaskKind::Insert, TaskKind::Remove})
        if (to_string(t) == name) return t;
    return std::nullopt;
}

void validate_edit(const EditSpec& edit) {
    auto fail = [](const std::string& what) { throw EditError(EditError::Kind::MissingTarget, "invalid edit: " + what); };
    const bool wants_target = edit.task != TaskKind::Insert;
    if (wants_target != edit.target.has_value())
        fail(wants_target ? "target instance id is required" : "insert takes no target");
    if (edit.task == TaskKind::Rotate && !(edit.angle_deg > 0 && edit.angle_deg < 360))
        fail("rotation angle must lie in (0, 360)");
    if ((edit.task == TaskKind::Translate || edit.task == TaskKind::Insert) && !edit.dest.inside_unit())
        fail("destination must lie in [0, 1]^2");
    if (edit.task == TaskKind::Insert && edit.category.empty()) fail("insert needs a category");
}

EditConfig EditConfig::from_sampler(const SamplerConfig& s) {
    EditConfig c;
    c.placement_half_extent = s.placement_half_extent;
    c.scale_min = s.scale_min;
    c.scale_max = s.scale_max;
    c.min_size_ratio = s.min_size_ratio;
    return c;
}

namespace {

std::size_t index_of(const SceneSpec& scene, std::uint16_t target) {
    for (std::size_t i = 0; i < scene.objects.size(); ++i)
        if (scene.objects[i].instance_id == target) return i;
    throw EditError(EditError::Kind::MissingTarget, "no object with instance id " + std::to_string(target));
}

Vec2 ground_point(const SceneSpec& scene, ImageCoord dest, const EditConfig& config) {
    const auto g = unproject_to_ground(scene.camera, dest);
    if (!g) throw EditError(EditError::Kind::OffPlane, "destination does not hit the ground plane");
    const double e = config.placement_half_extent;
    if (std::abs(g->x) > e || std::abs(g->y) > e)
        throw EditError(EditError::Kind::OffPlane, "destination lies outside the placement extent");
    return {g->x, g->y};
}

void require_clear(const SceneSpec& scene, const Footprint& fp, int ignore_id) {
    if (overlaps_any(scene, fp, ignore_id))
        throw EditError(EditError::Kind::Overlap, "edited object's circumcircle intersects another object");
}

bool allowed(const CategorySplit& split, Membership m, const std::string& category) {
    switch (m) {
        case Membership::Any: return true;
        case Membership::Seen: return split.seen.count(category) > 0;
        case Membership::Unseen: return split.unseen.count(category) > 0;
    }
    return false;
}

std::uint16_t next_id(const SceneSpec& scene) {
    std::uint16_t id = 1;
    for (const auto& o : scene.objects) id = std::max(id, o.instance_id);
    return static_cast<std::uint16_t>(id + 1);
}

}  // namespace

SceneSpec apply_translation(const SceneSpec& scene, std::uint16_t target, ImageCoord dest, const EditConfig& config) {
    const std::size_t i = index_of(scene, target);
    const Vec2 g = ground_point(scene, dest, config);
    SceneSpec out = scene;
    PlacedObject& obj = out.objects[i];
    const Vec2 shift = g - obj.footprint.center;
    obj.pose.translation.x += shift.x;
    obj.pose.translation.y += shift.y;
    obj.footprint.center = g;
    require_clear(out, obj.footprint, target);
    return out;
}

SceneSpec apply_rotation(const SceneSpec& scene, std::uint16_t target, double angle_deg, const EditConfig&) {
    const std::size_t i = index_of(scene, target);
    if (!std::isfinite(angle_deg)) throw EditError(EditError::Kind::MissingTarget, "rotation angle is not finite");
    double a = std::fmod(angle_deg, 360.0);
    if (a < 0) a += 360.0;
    if (a == 0.0 || a == 360.0) return scene;

    SceneSpec out = scene;
    PlacedObject& obj = out.objects[i];
    const Vec3 c = obj.world_center_of_mass();
    const Quat rz = Quat::rot_z(deg_to_rad(a));
    obj.pose.rotation = (rz * obj.pose.rotation).normalized();
    const Vec3 arm = rz.rotate(Vec3{obj.pose.translation.x - c.x, obj.pose.translation.y - c.y, 0});
    obj.pose.translation.x = c.x + arm.x;
    obj.pose.translation.y = c.y + arm.y;
    obj.footprint = compute_footprint(obj);
    require_clear(out, obj.footprint, target);
    return out;
}

SceneSpec apply_insertion(const SceneSpec& scene, const std::string& category, ImageCoord dest,
                          const Catalog& catalog, const CategorySplit& split, Membership membership,
                          const EditConfig& config, Rng& rng) {
    if (static_cast<int>(scene.objects.size()) >= config.max_objects)
        throw EditError(EditError::Kind::SceneFull, "scene already holds " + std::to_string(scene.objects.size()) +
                                                        " objects");
    const auto& cats = catalog.categories();
    if (!std::binary_search(cats.begin(), cats.end(), category) || !allowed(split, membership, category))
        throw EditError(EditError::Kind::UnknownCategory,
                        "category '" + category + "' is not available for " + std::string(to_string(membership)) +
                            " examples");
    const Vec2 g = ground_point(scene, dest, config);

    std::vector<Footprint> footprints;
    for (const auto& o : scene.objects) footprints.push_back(o.footprint);
    footprints.emplace_back();

    long overlap = 0, ratio = 0;
    for (int attempt = 0; attempt < config.max_insert_attempts; ++attempt) {
        auto asset = sample_asset(catalog, split, membership, category, rng);
        const double theta = rng.uniform(0, 360);
        const double side = rng.uniform(config.scale_min, config.scale_max);
        PlacedObject probe = place_asset(asset, theta, 1.0, g, 0);
        const double scale = side / probe.footprint.longest_side();
        PlacedObject obj = place_asset(asset, theta, scale, g, next_id(scene));
        footprints.back() = obj.footprint;
        if (overlaps_any(scene, obj.footprint)) {
            ++overlap;
            continue;
        }
        if (size_ratio(footprints) <= config.min_size_ratio) {
            ++ratio;
            continue;
        }
        SceneSpec out = scene;
        out.objects.push_back(std::move(obj));
        return out;
    }
    std::ostringstream msg;
    msg << "insertion of '" << category << "' failed after " << config.max_insert_attempts
        << " placements (overlap: " << overlap << ", size ratio: " << ratio << ")";
    throw EditError(EditError::Kind::Overlap, msg.str());
}

SceneSpec insert_placed(const SceneSpec& scene, PlacedObject object, const EditConfig& config) {
    if (static_cast<int>(scene.objects.size()) >= config.max_objects)
        throw EditError(EditError::Kind::SceneFull, "scene is full");
    require_clear(scene, object.footprint, -1);
    SceneSpec out = scene;
    object.instance_id = next_id(scene);
    out.objects.push_back(std::move(object));
    return out;
}

SceneSpec apply_removal(const SceneSpec& scene, std::uint16_t target) {
    const std::size_t i = index_of(scene, target);
    SceneSpec out = scene;
    out.objects.erase(out.objects.begin() + static_cast<std::ptrdiff_t>(i));
    return out;
}

SceneSpec apply_edit(const SceneSpec& scene, const EditSpec& edit, const Catalog& catalog,
                     const CategorySplit& split, Membership membership, const EditConfig& config, Rng& rng) {
    validate_edit(edit);
    switch (edit.task) {
        case TaskKind::Translate: return apply_translation(scene, *edit.target, edit.dest, config);
        case TaskKind::Rotate: return apply_rotation(scene, *edit.target, edit.angle_deg, config);
        case TaskKind::Insert:
            return apply_insertion(scene, edit.category, edit.dest, catalog, split, membership, config, rng);
        case TaskKind::Remove: return apply_removal(scene, *edit.target);
    }
    throw EditError(EditError::Kind::MissingTarget, "unknown task");
}

namespace {

std::string with_article(const std::string& noun) {
    if (noun.empty()) return noun;
    const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(noun[0])));
    const bool vowel = c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
    return (vowel ? "an " : "a ") + noun;
}

std::string format(const char* pattern, const std::string& subject, double a, double b = 0) {
    const int n = std::snprintf(nullptr, 0, pattern, subject.c_str(), a, b);
    std::string out(static_cast<std::size_t>(n), '\0');
    std::snprintf(out.data(), out.size() + 1, pattern, subject.c_str(), a, b);
    return out;
}

}  // namespace

std::string make_instruction(const EditSpec& edit, const SceneSpec& scene) {
    static constexpr const char* kRotate[kInstructionTemplates] = {
        "rotate %s counter-clockwise by %.2f degrees",
        "turn %s %.2f degrees counter-clockwise",
        "spin %s counter-clockwise through %.2f degrees",
    };
    static constexpr const char* kTranslate[kInstructionTemplates] = {
        "move %s to location (%.2f, %.2f)",
        "place %s at location (%.2f, %.2f)",
        "slide %s over to (%.2f, %.2f)",
    };
    static constexpr const char* kInsert[kInstructionTemplates] = {
        "insert %s at location (%.2f, %.2f)",
        "add %s at location (%.2f, %.2f)",
        "put %s at (%.2f, %.2f)",
    };
    static constexpr const char* kRemove[kInstructionTemplates] = {
        "remove %s",
        "delete %s from the scene",
        "take away %s",
    };
    const int t = ((edit.template_index % kInstructionTemplates) + kInstructionTemplates) % kInstructionTemplates;

    std::string subject;
    if (edit.task == TaskKind::Insert) {
        subject = with_article(edit.category);
    } else {
        if (!edit.target) throw EditError(EditError::Kind::MissingTarget, "edit has no target");
        const PlacedObject* obj = scene.find(*edit.target);
        if (!obj) throw EditError(EditError::Kind::MissingTarget, "no object with instance id " +
                                                                      std::to_string(*edit.target));
        subject = obj->asset->description;
    }
    switch (edit.task) {
        case TaskKind::Rotate: return format(kRotate[t], subject, edit.angle_deg);
        case TaskKind::Translate: return format(kTranslate[t], subject, edit.dest.x, edit.dest.y);
        case TaskKind::Insert: return format(kInsert[t], subject, edit.dest.x, edit.dest.y);
        case TaskKind::Remove: return format(kRemove[t], subject, 0);
    }
    return {};
}

namespace {

// A ground point in the placement extent that the camera sees inside the
// frame, and its image coordinate.
std::optional<std::pair<Vec2, ImageCoord>> sample_destination(const SceneSpec& scene, const EditConfig& config,
                                                             Rng& rng) {
    const double e = config.placement_half_extent;
    const Vec2 g{rng.uniform(-e, e), rng.uniform(-e, e)};
    const auto c = project(scene.camera, {g.x, g.y, 0});
    if (!c || !c->inside_unit()) return std::nullopt;
    return std::make_pair(g, *c);
}

}  // namespace

SampledEdit sample_edit(const SceneSpec& scene, TaskKind task, const Catalog& catalog, const CategorySplit& split,
                        Membership membership, const EditConfig& config, Rng& rng) {
    SampledEdit out;
    EditSpec& e = out.edit;
    e.task = task;
    e.template_index = static_cast<int>(rng.below(kInstructionTemplates));

    if (task != TaskKind::Insert) {
        if (scene.objects.empty()) throw Error("sample_edit: scene has no objects to edit");
        e.target = scene.objects[rng.below(scene.objects.size())].instance_id;
    }

    long failures = 0;
    std::string last;
    switch (task) {
        case TaskKind::Remove:
            out.target = apply_removal(scene, *e.target);
            break;
        case TaskKind::Rotate: {
            bool done = false;
            for (int i = 0; i < config.max_rotation_attempts && !done; ++i) {
                e.angle_deg = rng.uniform(config.angle_min_deg, config.angle_max_deg);
                try {
                    out.target = apply_rotation(scene, *e.target, e.angle_deg, config);
                    done = true;
                } catch (const EditError& err) {
                    last = err.what();
                }
            }
            if (!done) throw ExhaustionError("sample_edit: no collision-free rotation angle (" + last + ")");
            break;
        }
        case TaskKind::Translate:
        case TaskKind::Insert: {
            std::string category;
            if (task == TaskKind::Insert) {
                std::vector<std::string> pool;
                for (const auto& c : catalog.categories())
                    if (allowed(split, membership, c)) pool.push_back(c);
                if (pool.empty()) throw ExhaustionError("sample_edit: no category available for insertion");
                category = pool[rng.below(pool.size())];
                e.category = category;
            }
            bool done = false;
            for (int i = 0; i < config.max_destination_attempts && !done; ++i) {
                const auto d = sample_destination(scene, config, rng);
                if (!d) {
                    ++failures;
                    continue;
                }
                try {
                    out.target = task == TaskKind::Translate
                                     ? apply_translation(scene, *e.target, d->second, config)
                                     : apply_insertion(scene, category, d->second, catalog, split, membership,
                                                       config, rng);
                    e.dest = d->second;
                    e.ground = task == TaskKind::Translate ? out.target.find(*e.target)->footprint.center
                                                           : out.target.objects.back().footprint.center;
                    done = true;
                } catch (const EditError& err) {
                    ++failures;
                    last = err.what();
                }
            }
            if (!done)
                throw ExhaustionError("sample_edit: no valid " + std::string(to_string(task)) +
                                      " destination after " + std::to_string(failures) + " tries" +
                                      (last.empty() ? "" : " (" + last + ")"));
            break;
        }
    }
    e.instruction = make_instruction(e, task == TaskKind::Insert ? out.target : scene);
    return out;
}

bool reproject_edit(EditSpec& edit, const SceneSpec& scene, const Camera& camera) {
    if (edit.task == TaskKind::Translate || edit.task == TaskKind::Insert) {
        const auto c = project(camera, {edit.ground.x, edit.ground.y, 0});
        if (!c || !c->inside_unit()) return false;
        edit.dest = *c;
    }
    edit.instruction = make_instruction(edit, scene);
    return true;
}

}  // namespace forge
