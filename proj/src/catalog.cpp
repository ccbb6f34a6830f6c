#include "forge/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "forge/error.hpp"

#include "builtin_catalog.inc"

namespace forge {

using nlohmann::json;

Vec3 EnvLight::ambient_term() const {
    if (mode == Mode::ConstantAmbient || !map || map->empty()) return ambient;
    // Mean of the map in linear space.
    double acc[3] = {0, 0, 0};
    const std::size_t n = static_cast<std::size_t>(map->width) * map->height;
    for (std::size_t i = 0; i < n; ++i)
        for (int c = 0; c < 3; ++c) acc[c] += std::pow(map->pixels[3 * i + c] / 255.0, 2.2);
    return Vec3{acc[0], acc[1], acc[2]} * (1.0 / static_cast<double>(n)) * (ambient.x + ambient.y + ambient.z) / 3.0;
}

Catalog::Catalog(std::vector<AssetRecord> assets, std::vector<FloorTexture> floors, std::vector<EnvLight> envs)
    : floors_(std::move(floors)), envs_(std::move(envs)) {
    if (assets.empty()) throw CatalogError(CatalogError::Kind::Empty, "catalog has no assets");
    for (auto& a : assets) {
        if (a.id.empty()) throw CatalogError(CatalogError::Kind::Parse, "asset without id");
        if (a.category.empty()) throw CatalogError(CatalogError::Kind::Parse, "asset '" + a.id + "' has no category");
        if (a.canonical_mesh.empty())
            throw CatalogError(CatalogError::Kind::Parse, "asset '" + a.id + "' has an empty mesh");
        if (index_.count(a.id)) throw CatalogError(CatalogError::Kind::DuplicateId, "duplicate asset id '" + a.id + "'");
        try {
            if (!a.resting_pose) a.resting_pose = settle(a.canonical_mesh);
        } catch (const GeometryError& e) {
            throw CatalogError(CatalogError::Kind::InvalidParams, "asset '" + a.id + "': " + e.what());
        }
        const RestingPose& pose = *a.resting_pose;
        a.settled_mesh = transformed(a.canonical_mesh, pose.rotation, 1.0, {0, 0, pose.z_offset});
        a.canonical_com = center_of_mass(a.canonical_mesh);
        a.settled_com = pose.apply(a.canonical_com);
        index_.emplace(a.id, assets_.size());
        assets_.push_back(std::make_shared<const AssetRecord>(std::move(a)));
    }
    for (const auto& a : assets_) categories_.push_back(a->category);
    std::sort(categories_.begin(), categories_.end());
    categories_.erase(std::unique(categories_.begin(), categories_.end()), categories_.end());
    if (floors_.empty()) floors_ = builtin_floors();
    if (envs_.empty()) envs_ = builtin_env_lights();
}

std::shared_ptr<const AssetRecord> Catalog::find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    return it == index_.end() ? nullptr : assets_[it->second];
}

const FloorTexture* Catalog::find_floor(std::string_view id) const noexcept {
    for (const auto& f : floors_)
        if (f.id == id) return &f;
    return nullptr;
}

const EnvLight* Catalog::find_env(std::string_view id) const noexcept {
    for (const auto& e : envs_)
        if (e.id == id) return &e;
    return nullptr;
}

namespace {

Vec3 parse_rgb(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3) throw CatalogError(CatalogError::Kind::Parse, where + ": expected [r, g, b]");
    Vec3 c{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
    for (int i = 0; i < 3; ++i)
        if (!(c[i] >= 0 && c[i] <= 1)) throw CatalogError(CatalogError::Kind::Parse, where + ": color outside [0,1]");
    return c;
}

Material parse_material(const json& j, const std::string& where) {
    Material m;
    if (j.contains("color")) m.color = parse_rgb(j["color"], where);
    if (j.contains("color2")) m.color2 = parse_rgb(j["color2"], where);
    if (j.contains("pattern")) {
        const auto p = j["pattern"].get<std::string>();
        if (p == "solid") m.pattern = Pattern::Solid;
        else if (p == "stripes") m.pattern = Pattern::Stripes;
        else if (p == "checker") m.pattern = Pattern::Checker;
        else throw CatalogError(CatalogError::Kind::Parse, where + ": unknown pattern '" + p + "'");
    }
    if (j.contains("scale")) m.pattern_scale = j["scale"].get<double>();
    if (!(m.pattern_scale > 0)) throw CatalogError(CatalogError::Kind::Parse, where + ": pattern scale must be > 0");
    return m;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

}  // namespace

Catalog parse_catalog(std::string_view jsonl, const std::filesystem::path& base_dir) {
    std::vector<AssetRecord> assets;
    std::vector<FloorTexture> floors = builtin_floors();
    std::vector<EnvLight> envs = builtin_env_lights();

    std::size_t line_no = 0, pos = 0;
    while (pos < jsonl.size()) {
        std::size_t end = jsonl.find('\n', pos);
        if (end == std::string_view::npos) end = jsonl.size();
        const std::string_view line = jsonl.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        const std::string where = "catalog line " + std::to_string(line_no);

        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw CatalogError(CatalogError::Kind::Parse, where + ": " + e.what());
        }
        try {
            const std::string type = j.value("type", "asset");
            if (type == "floor") {
                FloorTexture f;
                f.id = j.at("id").get<std::string>();
                f.tiling = j.value("tiling", 1.0);
                const auto path = resolve(base_dir, j.at("path").get<std::string>());
                if (!std::filesystem::exists(path))
                    throw CatalogError(CatalogError::Kind::MissingFile, "floor '" + f.id + "': missing " + path.string());
                f.image = read_png_rgb(path);
                if (!(f.tiling > 0)) throw CatalogError(CatalogError::Kind::Parse, where + ": tiling must be > 0");
                floors.push_back(std::move(f));
                continue;
            }
            if (type == "env") {
                EnvLight e;
                e.id = j.at("id").get<std::string>();
                e.ambient = j.contains("ambient") ? parse_rgb(j["ambient"], where) : Vec3{1, 1, 1};
                if (j.contains("map")) {
                    const auto path = resolve(base_dir, j["map"].get<std::string>());
                    if (!std::filesystem::exists(path))
                        throw CatalogError(CatalogError::Kind::MissingFile, "env '" + e.id + "': missing " + path.string());
                    e.mode = EnvLight::Mode::Equirect;
                    e.map = read_png_rgb(path);
                }
                envs.push_back(std::move(e));
                continue;
            }
            if (type != "asset") throw CatalogError(CatalogError::Kind::Parse, where + ": unknown type '" + type + "'");

            AssetRecord a;
            a.id = j.at("id").get<std::string>();
            a.category = j.at("category").get<std::string>();
            a.description = j.value("description", "a " + a.category);
            a.scale_hint = j.value("scale_hint", 1.0);
            if (j.contains("material")) a.material = parse_material(j["material"], where);
            const json& src = j.at("source");
            const std::string kind = src.at("kind").get<std::string>();
            if (kind == "mesh") {
                a.mesh_path = resolve(base_dir, src.at("path").get<std::string>());
                if (!std::filesystem::exists(a.mesh_path))
                    throw CatalogError(CatalogError::Kind::MissingFile,
                                       "asset '" + a.id + "': missing mesh file " + a.mesh_path.string());
                a.canonical_mesh = load_ascii_mesh(a.mesh_path);
            } else {
                const auto pk = primitive_kind_from_string(kind);
                if (!pk) throw CatalogError(CatalogError::Kind::Parse, where + ": unknown source kind '" + kind + "'");
                PrimitiveSource ps;
                ps.kind = *pk;
                ps.seed = src.value("seed", std::uint64_t{0});
                if (src.contains("params"))
                    for (const auto& [k, v] : src["params"].items()) ps.params[k] = v.get<double>();
                a.canonical_mesh = generate_primitive(ps.kind, ps.params, ps.seed);
                a.primitive = std::move(ps);
            }
            assets.push_back(std::move(a));
        } catch (const json::exception& e) {
            throw CatalogError(CatalogError::Kind::Parse, where + ": " + e.what());
        } catch (const IoError& e) {
            throw CatalogError(CatalogError::Kind::Parse, where + ": " + e.what());
        }
    }
    return Catalog(std::move(assets), std::move(floors), std::move(envs));
}

Catalog load_catalog(const std::filesystem::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw CatalogError(CatalogError::Kind::MissingFile, "cannot open catalog " + manifest_path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_catalog(buffer.str(), manifest_path.parent_path());
}

std::string_view builtin_catalog_manifest() noexcept { return kBuiltinCatalogManifest; }

const Catalog& builtin_catalog() {
    static const Catalog catalog = parse_catalog(builtin_catalog_manifest(), std::filesystem::current_path());
    return catalog;
}

namespace {

void put(Image& img, int x, int y, Vec3 c) {
    auto* p = img.at(x, y);
    for (int i = 0; i < 3; ++i) p[i] = static_cast<std::uint8_t>(std::lround(std::clamp(c[i], 0.0, 1.0) * 255.0));
}

// Value noise in [0,1) on an integer lattice.
double lattice(std::uint64_t seed, int x, int y) {
    return Rng(hash_combine(hash_combine(seed, static_cast<std::uint64_t>(x)), static_cast<std::uint64_t>(y)))
        .uniform();
}

template <class F>
FloorTexture procedural(std::string id, double tiling, int size, F&& shade) {
    FloorTexture f{std::move(id), Image(size, size), tiling};
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) put(f.image, x, y, shade(x, y));
    return f;
}

}  // namespace

std::vector<FloorTexture> builtin_floors() {
    constexpr int n = 128;
    std::vector<FloorTexture> out;
    out.push_back(procedural("oak_planks", 2.0, n, [](int x, int y) {
        const int plank = y / 16;
        const double grain = 0.5 + 0.5 * std::sin((x + 37 * plank) * 0.35 + 3 * lattice(7, x / 8, plank));
        const double seam = (y % 16 == 0 || (x + 41 * plank) % 96 == 0) ? 0.55 : 1.0;
        return Vec3{0.55 + 0.12 * grain, 0.36 + 0.08 * grain, 0.20 + 0.05 * grain} * seam;
    }));
    out.push_back(procedural("red_brick", 1.5, n, [](int x, int y) {
        const int row = y / 16;
        const int xs = x + (row % 2) * 16;
        const bool mortar = y % 16 < 2 || xs % 32 < 2;
        if (mortar) return Vec3{0.78, 0.76, 0.72};
        const double v = 0.85 + 0.15 * lattice(11, xs / 32, row);
        return Vec3{0.62, 0.24, 0.18} * v;
    }));
    out.push_back(procedural("cobblestone", 1.5, n, [](int x, int y) {
        // Distance to the nearest jittered cell center.
        const int cx = x / 16, cy = y / 16;
        double best = 1e9, second = 1e9;
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                const int gx = (cx + dx + 8) % 8, gy = (cy + dy + 8) % 8;
                const double px = (cx + dx) * 16 + 16 * lattice(13, gx, gy);
                const double py = (cy + dy) * 16 + 16 * lattice(17, gx, gy);
                const double d = std::hypot(x - px, y - py);
                if (d < best) second = best, best = d;
                else if (d < second) second = d;
            }
        }
        const double edge = std::clamp((second - best) / 3.0, 0.0, 1.0);
        return Vec3{0.42, 0.42, 0.44} * (0.45 + 0.55 * edge);
    }));
    out.push_back(procedural("slate_tiles", 2.0, n, [](int x, int y) {
        if (x % 32 < 2 || y % 32 < 2) return Vec3{0.15, 0.15, 0.16};
        const double v = 0.8 + 0.2 * lattice(19, x / 32, y / 32);
        return Vec3{0.32, 0.36, 0.40} * v;
    }));
    out.push_back(procedural("checker", 1.0, n, [](int x, int y) {
        return ((x / 32 + y / 32) % 2) ? Vec3{0.85, 0.85, 0.82} : Vec3{0.25, 0.25, 0.27};
    }));
    out.push_back(procedural("sandstone", 1.0, n, [](int x, int y) {
        const double v = 0.85 + 0.1 * lattice(23, x / 4, y / 4) + 0.05 * lattice(29, x, y);
        return Vec3{0.76, 0.66, 0.48} * v;
    }));
    return out;
}

std::vector<EnvLight> builtin_env_lights() {
    return {
        {"studio_neutral", EnvLight::Mode::ConstantAmbient, {0.22, 0.22, 0.22}, std::nullopt},
        {"warm_interior", EnvLight::Mode::ConstantAmbient, {0.26, 0.21, 0.16}, std::nullopt},
        {"overcast_sky", EnvLight::Mode::ConstantAmbient, {0.18, 0.21, 0.26}, std::nullopt},
        {"dusk", EnvLight::Mode::ConstantAmbient, {0.24, 0.17, 0.17}, std::nullopt},
    };
}

CategorySplit split_categories(std::vector<std::string> categories, std::size_t n_unseen, std::uint64_t seed) {
    std::sort(categories.begin(), categories.end());
    categories.erase(std::unique(categories.begin(), categories.end()), categories.end());
    if (n_unseen >= categories.size())
        throw CatalogError(CatalogError::Kind::InvalidParams,
                           "cannot hold out " + std::to_string(n_unseen) + " of " +
                               std::to_string(categories.size()) + " categories");
    Rng rng(hash_combine(seed, hash_string("category-split")));
    for (std::size_t i = categories.size() - 1; i > 0; --i) std::swap(categories[i], categories[rng.below(i + 1)]);
    CategorySplit split;
    for (std::size_t i = 0; i < categories.size(); ++i)
        (i < n_unseen ? split.unseen : split.seen).insert(categories[i]);
    return split;
}

std::string_view to_string(Membership m) noexcept {
    switch (m) {
        case Membership::Any: return "any";
        case Membership::Seen: return "seen";
        case Membership::Unseen: return "unseen";
    }
    return "?";
}

std::shared_ptr<const AssetRecord> sample_asset(const Catalog& catalog, const CategorySplit& split,
                                                Membership membership,
                                                const std::optional<std::string>& category, Rng& rng) {
    std::vector<std::size_t> matches;
    const auto& assets = catalog.assets();
    for (std::size_t i = 0; i < assets.size(); ++i) {
        const auto& a = *assets[i];
        if (category && a.category != *category) continue;
        if (membership == Membership::Seen && !split.seen.count(a.category)) continue;
        if (membership == Membership::Unseen && !split.unseen.count(a.category)) continue;
        matches.push_back(i);
    }
    if (matches.empty())
        throw CatalogError(CatalogError::Kind::NoMatch,
                           "no asset matches membership '" + std::string(to_string(membership)) + "'" +
                               (category ? " and category '" + *category + "'" : std::string()));
    return assets[matches[rng.below(matches.size())]];
}

CatalogStats catalog_stats(const Catalog& catalog) {
    CatalogStats s;
    for (const auto& a : catalog.assets()) ++s.per_category[a->category];
    s.total_objects = catalog.assets().size();
    s.total_categories = s.per_category.size();
    if (s.per_category.empty()) return s;

    std::vector<double> counts;
    for (const auto& [_, n] : s.per_category) counts.push_back(static_cast<double>(n));
    std::sort(counts.begin(), counts.end());
    const std::size_t k = counts.size();
    s.median_per_category = k % 2 ? counts[k / 2] : 0.5 * (counts[k / 2 - 1] + counts[k / 2]);
    double sum = 0;
    for (double c : counts) sum += c;
    s.mean_per_category = sum / static_cast<double>(k);
    double var = 0;
    for (double c : counts) var += (c - s.mean_per_category) * (c - s.mean_per_category);
    s.std_per_category = std::sqrt(var / static_cast<double>(k));
    return s;
}

}  // namespace forge
