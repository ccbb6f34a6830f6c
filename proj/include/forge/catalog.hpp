#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "forge/geometry.hpp"
#include "forge/image.hpp"
#include "forge/rng.hpp"
#include "forge/settle.hpp"

namespace forge {

enum class PrimitiveKind { Box, Sphere, Cylinder, Cone, Torus, LBlock, Table };

std::string_view to_string(PrimitiveKind kind) noexcept;
std::optional<PrimitiveKind> primitive_kind_from_string(std::string_view name) noexcept;

using PrimitiveParams = std::map<std::string, double>;

/// Watertight primitive with outward normals and UVs, centered on its
/// bounding box. Deterministic in (kind, params, seed); the seed only
/// matters when a `jitter` parameter is non-zero.
///
/// Parameters (defaults in brackets):
///   box:      sx, sy, sz [1] in (0, 100]
///   sphere:   radius [0.5], subdivisions [3] in 1..6, jitter [0] in [0, 0.3]
///   cylinder: radius [0.5], height [1], segments [32] in 3..256
///   cone:     radius [0.5], height [1], segments [32] in 3..256
///   torus:    major [0.5], minor [0.15] < major, segments [32], rings [16]
///   lblock:   a [1], b [1] arm lengths, thickness [0.3] < min(a, b), depth [0.4]
///   table:    width [1], depth [0.7], height [0.6], top [0.08] < height, leg [0.08]
/// Throws CatalogError(InvalidParams) for unknown keys or out-of-range values.
TriMesh generate_primitive(PrimitiveKind kind, const PrimitiveParams& params, std::uint64_t seed = 0);

/// Wavefront-style ASCII mesh: `v x y z`, `vt u v`, `vn x y z` and
/// `f a b c ...` with `i`, `i/t`, `i//n` or `i/t/n` references (1-based,
/// negative = relative). Polygons are fan-triangulated; other statements
/// are ignored. Each position keeps the first uv/normal it is referenced
/// with; missing normals are recomputed and missing uvs are a planar
/// projection. Throws CatalogError(Parse).
TriMesh parse_ascii_mesh(std::string_view text);
TriMesh load_ascii_mesh(const std::filesystem::path& path);

enum class Pattern { Solid, Stripes, Checker };

/// Lambertian albedo, optionally patterned in object space.
struct Material {
    Vec3 color{0.7, 0.7, 0.7};
    Vec3 color2{0.2, 0.2, 0.2};
    Pattern pattern = Pattern::Solid;
    double pattern_scale = 0.25;  // object-space units per stripe/cell

    friend bool operator==(const Material&, const Material&) = default;
};

struct PrimitiveSource {
    PrimitiveKind kind = PrimitiveKind::Box;
    PrimitiveParams params;
    std::uint64_t seed = 0;
};

struct AssetRecord {
    std::string id;
    std::string category;
    std::string description;
    std::optional<PrimitiveSource> primitive;  // exactly one of primitive / mesh_path
    std::filesystem::path mesh_path;
    double scale_hint = 1.0;
    Material material;

    TriMesh canonical_mesh;
    std::optional<RestingPose> resting_pose;

    // Derived at load: canonical mesh with the resting pose applied
    // (lowest point at z = 0) and its center of mass.
    TriMesh settled_mesh;
    Vec3 settled_com;
    Vec3 canonical_com;
};

struct FloorTexture {
    std::string id;
    Image image;
    double tiling = 1.0;  // scene units covered by one repeat
};

struct EnvLight {
    enum class Mode { ConstantAmbient, Equirect };
    std::string id;
    Mode mode = Mode::ConstantAmbient;
    Vec3 ambient{0.2, 0.2, 0.2};
    std::optional<Image> map;

    /// Ambient term used for shading: the constant, or the map's mean color.
    Vec3 ambient_term() const;
};

class Catalog {
public:
    Catalog() = default;

    /// Validates and settles every asset. Throws CatalogError.
    Catalog(std::vector<AssetRecord> assets, std::vector<FloorTexture> floors, std::vector<EnvLight> envs);

    const std::vector<std::shared_ptr<const AssetRecord>>& assets() const noexcept { return assets_; }
    std::shared_ptr<const AssetRecord> find(std::string_view id) const;
    /// Sorted, distinct.
    const std::vector<std::string>& categories() const noexcept { return categories_; }
    const std::vector<FloorTexture>& floors() const noexcept { return floors_; }
    const std::vector<EnvLight>& env_lights() const noexcept { return envs_; }
    const FloorTexture* find_floor(std::string_view id) const noexcept;
    const EnvLight* find_env(std::string_view id) const noexcept;

private:
    std::vector<std::shared_ptr<const AssetRecord>> assets_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::string> categories_;
    std::vector<FloorTexture> floors_;
    std::vector<EnvLight> envs_;
};

/// Parses a JSONL catalog manifest. Relative mesh/map paths resolve
/// against `base_dir`. Throws CatalogError.
Catalog parse_catalog(std::string_view jsonl, const std::filesystem::path& base_dir);
Catalog load_catalog(const std::filesystem::path& manifest_path);

/// The shipped desk-scale manifest.
std::string_view builtin_catalog_manifest() noexcept;
const Catalog& builtin_catalog();

/// Built-in procedural floors and ambient presets; always present.
std::vector<FloorTexture> builtin_floors();
std::vector<EnvLight> builtin_env_lights();

struct CategorySplit {
    std::set<std::string> seen;
    std::set<std::string> unseen;

    bool is_seen(const std::string& category) const { return seen.count(category) > 0; }
    friend bool operator==(const CategorySplit&, const CategorySplit&) = default;
};

/// Shuffles the (sorted, deduplicated) categories with the seed and holds
/// out the first n_unseen. Throws CatalogError when n_unseen >= count.
CategorySplit split_categories(std::vector<std::string> categories, std::size_t n_unseen, std::uint64_t seed);

enum class Membership { Any, Seen, Unseen };

std::string_view to_string(Membership m) noexcept;

/// Uniform over the assets matching membership and (optionally) category.
/// Throws CatalogError(NoMatch).
std::shared_ptr<const AssetRecord> sample_asset(const Catalog& catalog, const CategorySplit& split,
                                                Membership membership,
                                                const std::optional<std::string>& category, Rng& rng);

struct CatalogStats {
    std::size_t total_objects = 0;
    std::size_t total_categories = 0;
    double median_per_category = 0;
    double mean_per_category = 0;
    double std_per_category = 0;  // population
    std::map<std::string, std::size_t> per_category;
};

CatalogStats catalog_stats(const Catalog& catalog);

}  // namespace forge
