#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forge/catalog.hpp"
#include "forge/edit.hpp"
#include "forge/render.hpp"
#include "forge/scene.hpp"

namespace forge {

inline constexpr int kSchemaVersion = 1;

enum class SplitMembership { Seen, Unseen, Mixed, Any };

/// Everything a generation run depends on. Parsed from a key = value file;
/// see README for the keys.
struct RunConfig {
    SamplerConfig sampler;
    RenderSettings render;
    EditConfig edit;

    std::vector<TaskKind> tasks{TaskKind::Translate, TaskKind::Rotate, TaskKind::Insert, TaskKind::Remove};
    std::vector<std::string> splits{"train"};
    std::map<std::string, int> split_counts{{"train", 256}, {"val", 32}, {"test", 32}};
    std::map<TaskKind, int> task_counts;  // overrides split_counts when present
    std::map<std::string, SplitMembership> membership{
        {"train", SplitMembership::Seen}, {"val", SplitMembership::Mixed}, {"test", SplitMembership::Mixed}};

    std::uint64_t seed = 0;  // category split and every example stream
    std::size_t n_unseen = 3;
    std::string catalog = "builtin";  // or a manifest path
    std::filesystem::path output_root = "run";
    int threads = 0;
    int max_salts = 16;
    std::vector<double> angle_edges{0, 45, 90, 135, 180, 225, 270, 315, 360};

    int count_for(const std::string& split, TaskKind task) const;
    /// Throws Error on invalid values.
    void validate() const;
};

/// Throws Error naming the line on unknown keys or bad values. Relative
/// paths resolve against `base_dir`.
RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);
/// Canonical key = value text; parse_run_config(to_config_text(c)) == c
/// for every field that matters to the output.
std::string to_config_text(const RunConfig& config);

std::string_view to_string(SplitMembership m) noexcept;

struct ObjectRecord {
    std::string asset_id;
    std::string category;
    bool seen = true;
    std::uint16_t instance_id = 2;
    double scale = 1;
    RigidPose pose;
    Footprint footprint;

    friend bool operator==(const ObjectRecord&, const ObjectRecord&) = default;
};

struct SceneRecord {
    std::vector<ObjectRecord> objects;
    std::string floor_id;
    double plane_half_extent = 4;
    LightingRig lighting;
    Camera camera;
    std::uint64_t seed = 0;

    friend bool operator==(const SceneRecord&, const SceneRecord&) = default;
};

struct ExampleRecord {
    int schema_version = kSchemaVersion;
    std::string id;
    std::string split;
    std::string membership;  // "seen" or "unseen"
    std::uint64_t index = 0;
    int salt = 0;
    std::uint64_t seed = 0;
    std::uint64_t render_seed = 0;
    EditSpec edit;
    std::uint16_t edited_instance = 0;  // target id, or the new id for insert
    int pullback_steps = 0;
    SceneRecord source;
    SceneRecord target;
    std::string source_image, target_image, source_mask, target_mask;  // relative to the run root
    std::vector<std::string> flags;

    friend bool operator==(const ExampleRecord&, const ExampleRecord&) = default;
};

/// Objects in the scene holding the edited object: the target scene for
/// insertions, the source scene otherwise.
std::size_t scene_object_count(const ExampleRecord& record) noexcept;

SceneRecord to_record(const SceneSpec& scene, const CategorySplit& split);
/// Throws SchemaError when an asset id is not in the catalog.
SceneSpec from_record(const SceneRecord& record, const Catalog& catalog);

/// One JSON object, no trailing newline. Doubles round-trip exactly.
std::string serialize_record(const ExampleRecord& record);
/// Throws SchemaError naming the record id (or line) on a bad record.
ExampleRecord parse_record(std::string_view line);

struct Manifest {
    std::vector<ExampleRecord> records;
};

Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

/// Scenes and edit for one example, before rendering.
struct ExamplePlan {
    ExampleRecord record;
    SceneSpec source;
    SceneSpec target;
};

/// Everything shared by the examples of a run.
struct RunContext {
    RunConfig config;
    Catalog catalog;
    CategorySplit split;
};

RunContext make_context(const RunConfig& config);

/// The example id used on disk, e.g. rotate_train_000007.
std::string example_id(TaskKind task, const std::string& split, std::uint64_t index);

/// Samples the scene, edit and camera of one example. Failures are retried
/// with salted streams; returns nullopt (with the last error in `why`)
/// when every salt fails.
std::optional<ExamplePlan> plan_example(const RunContext& ctx, TaskKind task, const std::string& split,
                                        std::uint64_t index, std::string* why = nullptr);

struct GenerateOptions {
    bool resume = false;
    bool quiet = false;  // suppress per-example logs
};

struct GenerateSummary {
    std::size_t generated = 0;
    std::size_t reused = 0;
    std::size_t skipped = 0;
    double seconds = 0;
};

/// Writes config.txt, manifest.jsonl, skipped.jsonl and images/<id>/ under
/// config.output_root. Output bytes depend only on the config.
GenerateSummary generate(const RunConfig& config, const GenerateOptions& options = {});

struct RerenderOptions {
    std::optional<std::filesystem::path> output_root;  // default: next to the manifest
    std::optional<Resolution> resolution;
    std::optional<int> samples_per_pixel;
};

/// Rebuilds every scene from the manifest (catalog and render settings
/// from the config.txt beside it) and renders it again.
std::size_t rerender(const std::filesystem::path& manifest_path, const RerenderOptions& options = {});

/// Angle histogram bucket label for edges e: "[e_i, e_i+1)".
std::string angle_bucket(double angle_deg, const std::vector<double>& edges);

std::string catalog_stats_report(const Catalog& catalog);
std::string manifest_stats_report(const Manifest& manifest, const std::vector<double>& angle_edges);

}  // namespace forge
