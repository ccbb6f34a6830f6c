#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "forge/dataset.hpp"
#include "forge/error.hpp"

namespace forge {

using json = nlohmann::ordered_json;

namespace {

json vec(Vec3 v) { return json::array({v.x, v.y, v.z}); }
json vec(Vec2 v) { return json::array({v.x, v.y}); }
json quat(const Quat& q) { return json::array({q.w, q.x, q.y, q.z}); }

Vec3 get_vec3(const json& j) {
    if (!j.is_array() || j.size() != 3) throw SchemaError("expected a 3-vector");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}
Vec2 get_vec2(const json& j) {
    if (!j.is_array() || j.size() != 2) throw SchemaError("expected a 2-vector");
    return {j[0].get<double>(), j[1].get<double>()};
}
Quat get_quat(const json& j) {
    if (!j.is_array() || j.size() != 4) throw SchemaError("expected a quaternion [w, x, y, z]");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

json light_json(const DirectionalLight& l) {
    return json{{"direction", vec(l.direction)},
                {"intensity", l.intensity},
                {"color", vec(l.color)},
                {"casts_shadow", l.casts_shadow}};
}

DirectionalLight light_from(const json& j) {
    DirectionalLight l;
    l.direction = get_vec3(j.at("direction"));
    l.intensity = j.at("intensity").get<double>();
    l.color = get_vec3(j.at("color"));
    l.casts_shadow = j.at("casts_shadow").get<bool>();
    return l;
}

json rig_json(const RigLight& r) {
    json j{{"azimuth_offset", r.azimuth_offset_deg}, {"elevation", r.elevation_deg}};
    const json light = light_json(r.light);
    for (const auto& [k, v] : light.items()) j[k] = v;
    return j;
}

RigLight rig_from(const json& j) {
    RigLight r;
    r.azimuth_offset_deg = j.at("azimuth_offset").get<double>();
    r.elevation_deg = j.at("elevation").get<double>();
    r.light = light_from(j);
    return r;
}

json scene_json(const SceneRecord& s) {
    json objects = json::array();
    for (const auto& o : s.objects)
        objects.push_back(json{{"instance_id", o.instance_id},
                               {"asset", o.asset_id},
                               {"category", o.category},
                               {"seen", o.seen},
                               {"scale", o.scale},
                               {"rotation", quat(o.pose.rotation)},
                               {"translation", vec(o.pose.translation)},
                               {"footprint_center", vec(o.footprint.center)},
                               {"footprint_half_extents", vec(o.footprint.half_extents)}});
    const Camera& c = s.camera;
    return json{{"objects", objects},
                {"floor", s.floor_id},
                {"plane_half_extent", s.plane_half_extent},
                {"camera",
                 {{"position", vec(c.position)},
                  {"target", vec(c.target)},
                  {"up", vec(c.up)},
                  {"fov", c.vertical_fov_deg},
                  {"width", c.resolution.width},
                  {"height", c.resolution.height}}},
                {"lighting",
                 {{"directional", light_json(s.lighting.directional)},
                  {"key", rig_json(s.lighting.key)},
                  {"fill", rig_json(s.lighting.fill)},
                  {"back", rig_json(s.lighting.back)},
                  {"env", s.lighting.env_id},
                  {"ambient", vec(s.lighting.ambient)}}},
                {"seed", s.seed}};
}

SceneRecord scene_from(const json& j) {
    SceneRecord s;
    for (const auto& o : j.at("objects")) {
        ObjectRecord r;
        r.instance_id = o.at("instance_id").get<std::uint16_t>();
        r.asset_id = o.at("asset").get<std::string>();
        r.category = o.at("category").get<std::string>();
        r.seen = o.at("seen").get<bool>();
        r.scale = o.at("scale").get<double>();
        r.pose.rotation = get_quat(o.at("rotation"));
        r.pose.translation = get_vec3(o.at("translation"));
        r.footprint.center = get_vec2(o.at("footprint_center"));
        r.footprint.half_extents = get_vec2(o.at("footprint_half_extents"));
        s.objects.push_back(std::move(r));
    }
    s.floor_id = j.at("floor").get<std::string>();
    s.plane_half_extent = j.at("plane_half_extent").get<double>();
    const json& c = j.at("camera");
    s.camera.position = get_vec3(c.at("position"));
    s.camera.target = get_vec3(c.at("target"));
    s.camera.up = get_vec3(c.at("up"));
    s.camera.vertical_fov_deg = c.at("fov").get<double>();
    s.camera.resolution = {c.at("width").get<int>(), c.at("height").get<int>()};
    const json& l = j.at("lighting");
    s.lighting.directional = light_from(l.at("directional"));
    s.lighting.key = rig_from(l.at("key"));
    s.lighting.fill = rig_from(l.at("fill"));
    s.lighting.back = rig_from(l.at("back"));
    s.lighting.env_id = l.at("env").get<std::string>();
    s.lighting.ambient = get_vec3(l.at("ambient"));
    s.seed = j.at("seed").get<std::uint64_t>();
    return s;
}

json edit_json(const EditSpec& e) {
    json payload = json::object();
    switch (e.task) {
        case TaskKind::Translate: payload["dest"] = json::array({e.dest.x, e.dest.y}); break;
        case TaskKind::Rotate: payload["angle"] = e.angle_deg; break;
        case TaskKind::Insert:
            payload["dest"] = json::array({e.dest.x, e.dest.y});
            payload["category"] = e.category;
            break;
        case TaskKind::Remove: break;
    }
    json j{{"task", std::string(to_string(e.task))},
           {"target", e.target ? json(*e.target) : json(nullptr)},
           {"payload", payload},
           {"instruction", e.instruction},
           {"template", e.template_index}};
    if (e.task == TaskKind::Translate || e.task == TaskKind::Insert) j["ground"] = vec(e.ground);
    return j;
}

EditSpec edit_from(const json& j) {
    EditSpec e;
    const auto task = task_kind_from_string(j.at("task").get<std::string>());
    if (!task) throw SchemaError("unknown task '" + j.at("task").get<std::string>() + "'");
    e.task = *task;
    if (!j.at("target").is_null()) e.target = j.at("target").get<std::uint16_t>();
    const json& p = j.at("payload");
    if (e.task == TaskKind::Translate || e.task == TaskKind::Insert) {
        const Vec2 d = get_vec2(p.at("dest"));
        e.dest = {d.x, d.y};
        e.ground = get_vec2(j.at("ground"));
    }
    if (e.task == TaskKind::Rotate) e.angle_deg = p.at("angle").get<double>();
    if (e.task == TaskKind::Insert) e.category = p.at("category").get<std::string>();
    e.instruction = j.at("instruction").get<std::string>();
    e.template_index = j.at("template").get<int>();
    return e;
}

}  // namespace

std::size_t scene_object_count(const ExampleRecord& r) noexcept {
    return r.edit.task == TaskKind::Insert ? r.target.objects.size() : r.source.objects.size();
}

SceneRecord to_record(const SceneSpec& scene, const CategorySplit& split) {
    SceneRecord r;
    for (const auto& o : scene.objects)
        r.objects.push_back({o.asset->id, o.asset->category, split.is_seen(o.asset->category), o.instance_id,
                             o.uniform_scale, o.pose, o.footprint});
    r.floor_id = scene.floor_id;
    r.plane_half_extent = scene.plane_half_extent;
    r.lighting = scene.lighting;
    r.camera = scene.camera;
    r.seed = scene.seed;
    return r;
}

SceneSpec from_record(const SceneRecord& r, const Catalog& catalog) {
    SceneSpec s;
    for (const auto& o : r.objects) {
        auto asset = catalog.find(o.asset_id);
        if (!asset) throw SchemaError("asset '" + o.asset_id + "' is not in the catalog");
        PlacedObject p;
        p.asset = std::move(asset);
        p.pose = o.pose;
        p.uniform_scale = o.scale;
        p.footprint = o.footprint;
        p.instance_id = o.instance_id;
        s.objects.push_back(std::move(p));
    }
    s.floor_id = r.floor_id;
    s.plane_half_extent = r.plane_half_extent;
    s.lighting = r.lighting;
    s.camera = r.camera;
    s.seed = r.seed;
    return s;
}

std::string serialize_record(const ExampleRecord& r) {
    json j{{"schema_version", r.schema_version},
           {"id", r.id},
           {"split", r.split},
           {"membership", r.membership},
           {"index", r.index},
           {"salt", r.salt},
           {"seed", r.seed},
           {"render_seed", r.render_seed},
           {"edit", edit_json(r.edit)},
           {"edited_instance", r.edited_instance},
           {"pullback_steps", r.pullback_steps},
           {"source", scene_json(r.source)},
           {"target", scene_json(r.target)},
           {"files",
            {{"source", r.source_image},
             {"target", r.target_image},
             {"source_mask", r.source_mask},
             {"target_mask", r.target_mask}}},
           {"flags", r.flags}};
    return j.dump();
}

ExampleRecord parse_record(std::string_view line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("manifest record is not valid JSON: ") + e.what());
    }
    std::string id = "<unknown>";
    if (j.is_object() && j.contains("id") && j["id"].is_string()) id = j["id"].get<std::string>();
    try {
        ExampleRecord r;
        r.schema_version = j.at("schema_version").get<int>();
        if (r.schema_version != kSchemaVersion)
            throw SchemaError("schema version " + std::to_string(r.schema_version) + " is not supported (expected " +
                              std::to_string(kSchemaVersion) + ")");
        r.id = j.at("id").get<std::string>();
        r.split = j.at("split").get<std::string>();
        r.membership = j.at("membership").get<std::string>();
        r.index = j.at("index").get<std::uint64_t>();
        r.salt = j.at("salt").get<int>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.render_seed = j.at("render_seed").get<std::uint64_t>();
        r.edit = edit_from(j.at("edit"));
        r.edited_instance = j.at("edited_instance").get<std::uint16_t>();
        r.pullback_steps = j.at("pullback_steps").get<int>();
        r.source = scene_from(j.at("source"));
        r.target = scene_from(j.at("target"));
        const json& f = j.at("files");
        r.source_image = f.at("source").get<std::string>();
        r.target_image = f.at("target").get<std::string>();
        r.source_mask = f.at("source_mask").get<std::string>();
        r.target_mask = f.at("target_mask").get<std::string>();
        r.flags = j.at("flags").get<std::vector<std::string>>();
        return r;
    } catch (const SchemaError& e) {
        throw SchemaError("record " + id + ": " + e.what());
    } catch (const json::exception& e) {
        throw SchemaError("record " + id + ": " + e.what());
    }
}

Manifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open manifest " + path.string());
    Manifest m;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            m.records.push_back(parse_record(line));
        } catch (const SchemaError& e) {
            throw SchemaError(path.filename().string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return m;
}

void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        for (const auto& r : manifest.records) out << serialize_record(r) << '\n';
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace forge
