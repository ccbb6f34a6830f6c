#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "forge/catalog.hpp"
#include "forge/error.hpp"

namespace forge {

std::string_view to_string(PrimitiveKind kind) noexcept {
    switch (kind) {
        case PrimitiveKind::Box: return "box";
        case PrimitiveKind::Sphere: return "sphere";
        case PrimitiveKind::Cylinder: return "cylinder";
        case PrimitiveKind::Cone: return "cone";
        case PrimitiveKind::Torus: return "torus";
        case PrimitiveKind::LBlock: return "lblock";
        case PrimitiveKind::Table: return "table";
    }
    return "?";
}

std::optional<PrimitiveKind> primitive_kind_from_string(std::string_view name) noexcept {
    for (auto k : {PrimitiveKind::Box, PrimitiveKind::Sphere, PrimitiveKind::Cylinder, PrimitiveKind::Cone,
                   PrimitiveKind::Torus, PrimitiveKind::LBlock, PrimitiveKind::Table})
        if (to_string(k) == name) return k;
    return std::nullopt;
}

namespace {

// Reads parameters against a whitelist with defaults.
class ParamReader {
public:
    ParamReader(PrimitiveKind kind, const PrimitiveParams& given,
                std::initializer_list<std::pair<const char*, double>> defaults)
        : kind_(kind), values_(given) {
        for (const auto& [key, value] : given) {
            bool known = false;
            for (const auto& d : defaults) known |= key == d.first;
            if (!known) fail("unknown parameter '" + key + "'");
        }
        for (const auto& d : defaults) values_.try_emplace(d.first, d.second);
    }

    double get(const char* key, double lo, double hi) const {
        const double v = values_.at(key);
        if (!(v >= lo && v <= hi))
            fail(std::string(key) + " = " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " +
                 std::to_string(hi) + "]");
        return v;
    }

    int get_int(const char* key, int lo, int hi) const {
        const double v = get(key, lo, hi);
        if (v != std::floor(v)) fail(std::string(key) + " must be an integer");
        return static_cast<int>(v);
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw CatalogError(CatalogError::Kind::InvalidParams, std::string(to_string(kind_)) + ": " + msg);
    }

private:
    PrimitiveKind kind_;
    PrimitiveParams values_;
};

std::uint32_t add_vertex(TriMesh& m, Vec3 p) {
    m.vertices.push_back(p);
    return static_cast<std::uint32_t>(m.vertices.size() - 1);
}

void add_box(TriMesh& m, Vec3 lo, Vec3 hi) {
    const auto base = static_cast<std::uint32_t>(m.vertices.size());
    for (int i = 0; i < 8; ++i)
        m.vertices.push_back({(i & 1) ? hi.x : lo.x, (i & 2) ? hi.y : lo.y, (i & 4) ? hi.z : lo.z});
    static constexpr std::uint32_t faces[12][3] = {{0, 2, 3}, {0, 3, 1}, {4, 5, 7}, {4, 7, 6},
                                                   {0, 1, 5}, {0, 5, 4}, {2, 6, 7}, {2, 7, 3},
                                                   {0, 4, 6}, {0, 6, 2}, {1, 3, 7}, {1, 7, 5}};
    for (const auto& f : faces) m.triangles.push_back({base + f[0], base + f[1], base + f[2]});
}

TriMesh icosphere(double radius, int subdivisions, double jitter, std::uint64_t seed) {
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    TriMesh m;
    for (Vec3 p : {Vec3{-1, t, 0}, Vec3{1, t, 0}, Vec3{-1, -t, 0}, Vec3{1, -t, 0}, Vec3{0, -1, t}, Vec3{0, 1, t},
                   Vec3{0, -1, -t}, Vec3{0, 1, -t}, Vec3{t, 0, -1}, Vec3{t, 0, 1}, Vec3{-t, 0, -1}, Vec3{-t, 0, 1}})
        m.vertices.push_back(normalize(p));
    m.triangles = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                   {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                   {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> midpoint;
        auto mid = [&](std::uint32_t a, std::uint32_t b) {
            const auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            const auto id = add_vertex(m, normalize(m.vertices[a] + m.vertices[b]));
            midpoint.emplace(key, id);
            return id;
        };
        std::vector<Tri> next;
        next.reserve(m.triangles.size() * 4);
        for (const auto& tri : m.triangles) {
            const auto a = mid(tri[0], tri[1]), b = mid(tri[1], tri[2]), c = mid(tri[2], tri[0]);
            next.push_back({tri[0], a, c});
            next.push_back({tri[1], b, a});
            next.push_back({tri[2], c, b});
            next.push_back({a, b, c});
        }
        m.triangles = std::move(next);
    }
    Rng rng(hash_combine(seed, 0x73706865ULL));
    for (auto& v : m.vertices) {
        const double r = jitter > 0 ? radius * (1.0 + jitter * rng.uniform(-1, 1)) : radius;
        v = v * r;
    }
    m.smooth = jitter == 0;
    return m;
}

// Closed solid of revolution: a ring at z0, and either a ring or an apex at z1.
TriMesh lathe(double radius, double height, int segments, bool apex) {
    TriMesh m;
    const double z0 = -0.5 * height, z1 = 0.5 * height;
    for (int i = 0; i < segments; ++i) {
        const double a = 2 * kPi * i / segments;
        m.vertices.push_back({radius * std::cos(a), radius * std::sin(a), z0});
    }
    const auto n = static_cast<std::uint32_t>(segments);
    const std::uint32_t bottom = add_vertex(m, {0, 0, z0});
    std::uint32_t top = 0;
    if (apex) {
        top = add_vertex(m, {0, 0, z1});
    } else {
        for (int i = 0; i < segments; ++i) {
            const double a = 2 * kPi * i / segments;
            m.vertices.push_back({radius * std::cos(a), radius * std::sin(a), z1});
        }
        top = add_vertex(m, {0, 0, z1});
    }
    const std::uint32_t ring1 = n + 1;
    for (std::uint32_t i = 0; i < n; ++i) {
        const std::uint32_t j = (i + 1) % n;
        m.triangles.push_back({bottom, j, i});
        if (apex) {
            m.triangles.push_back({i, j, top});
        } else {
            m.triangles.push_back({i, j, ring1 + j});
            m.triangles.push_back({i, ring1 + j, ring1 + i});
            m.triangles.push_back({top, ring1 + i, ring1 + j});
        }
    }
    return m;
}

TriMesh torus(double major, double minor, int segments, int rings) {
    TriMesh m;
    for (int i = 0; i < segments; ++i) {
        const double th = 2 * kPi * i / segments;
        for (int j = 0; j < rings; ++j) {
            const double ph = 2 * kPi * j / rings;
            const double r = major + minor * std::cos(ph);
            m.vertices.push_back({r * std::cos(th), r * std::sin(th), minor * std::sin(ph)});
        }
    }
    auto id = [&](int i, int j) { return static_cast<std::uint32_t>((i % segments) * rings + (j % rings)); };
    for (int i = 0; i < segments; ++i) {
        for (int j = 0; j < rings; ++j) {
            m.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            m.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    m.smooth = true;
    return m;
}

// Prism over a CCW polygon that is star-shaped from its first vertex.
TriMesh extrude(const std::vector<Vec2>& poly, double depth) {
    TriMesh m;
    const auto n = static_cast<std::uint32_t>(poly.size());
    for (const auto& p : poly) m.vertices.push_back({p.x, p.y, 0});
    for (const auto& p : poly) m.vertices.push_back({p.x, p.y, depth});
    for (std::uint32_t i = 1; i + 1 < n; ++i) {
        m.triangles.push_back({0, i + 1, i});
        m.triangles.push_back({n, n + i, n + i + 1});
    }
    for (std::uint32_t i = 0; i < n; ++i) {
        const std::uint32_t j = (i + 1) % n;
        m.triangles.push_back({i, j, n + j});
        m.triangles.push_back({i, n + j, n + i});
    }
    return m;
}

void center_on_bounds(TriMesh& m) {
    const Vec3 c = bounds(m.vertices).center();
    for (auto& v : m.vertices) v -= c;
}

// Azimuthal angle and relative height about the bounding-box center.
void cylindrical_uvs(TriMesh& m) {
    const Aabb box = bounds(m.vertices);
    const Vec3 c = box.center();
    const double h = std::max(box.extent().z, 1e-12);
    m.uv.clear();
    m.uv.reserve(m.vertices.size());
    for (const auto& v : m.vertices) {
        const double u = (std::atan2(v.y - c.y, v.x - c.x) + kPi) / (2 * kPi);
        m.uv.push_back({std::clamp(u, 0.0, 1.0), std::clamp((v.z - box.lo.z) / h, 0.0, 1.0)});
    }
}

}  // namespace

TriMesh generate_primitive(PrimitiveKind kind, const PrimitiveParams& params, std::uint64_t seed) {
    TriMesh m;
    switch (kind) {
        case PrimitiveKind::Box: {
            ParamReader p(kind, params, {{"sx", 1}, {"sy", 1}, {"sz", 1}});
            const Vec3 h{p.get("sx", 1e-6, 100) / 2, p.get("sy", 1e-6, 100) / 2, p.get("sz", 1e-6, 100) / 2};
            add_box(m, -h, h);
            break;
        }
        case PrimitiveKind::Sphere: {
            ParamReader p(kind, params, {{"radius", 0.5}, {"subdivisions", 3}, {"jitter", 0}});
            m = icosphere(p.get("radius", 1e-6, 100), p.get_int("subdivisions", 1, 6), p.get("jitter", 0, 0.3), seed);
            break;
        }
        case PrimitiveKind::Cylinder:
        case PrimitiveKind::Cone: {
            ParamReader p(kind, params, {{"radius", 0.5}, {"height", 1}, {"segments", 32}});
            m = lathe(p.get("radius", 1e-6, 100), p.get("height", 1e-6, 100), p.get_int("segments", 3, 256),
                      kind == PrimitiveKind::Cone);
            break;
        }
        case PrimitiveKind::Torus: {
            ParamReader p(kind, params, {{"major", 0.5}, {"minor", 0.15}, {"segments", 32}, {"rings", 16}});
            const double major = p.get("major", 1e-6, 100);
            const double minor = p.get("minor", 1e-6, 100);
            if (minor >= major) p.fail("minor must be smaller than major");
            m = torus(major, minor, p.get_int("segments", 3, 256), p.get_int("rings", 3, 256));
            break;
        }
        case PrimitiveKind::LBlock: {
            ParamReader p(kind, params, {{"a", 1}, {"b", 1}, {"thickness", 0.3}, {"depth", 0.4}});
            const double a = p.get("a", 1e-6, 100), b = p.get("b", 1e-6, 100);
            const double t = p.get("thickness", 1e-6, 100), d = p.get("depth", 1e-6, 100);
            if (t >= std::min(a, b)) p.fail("thickness must be smaller than both arms");
            m = extrude({{0, 0}, {a, 0}, {a, t}, {t, t}, {t, b}, {0, b}}, d);
            break;
        }
        case PrimitiveKind::Table: {
            ParamReader p(kind, params, {{"width", 1}, {"depth", 0.7}, {"height", 0.6}, {"top", 0.08}, {"leg", 0.08}});
            const double w = p.get("width", 1e-3, 100), d = p.get("depth", 1e-3, 100), h = p.get("height", 1e-3, 100);
            const double top = p.get("top", 1e-4, 100), leg = p.get("leg", 1e-4, 100);
            if (top >= h) p.fail("top must be thinner than the height");
            if (2 * leg >= std::min(w, d)) p.fail("legs do not fit under the top");
            add_box(m, {-w / 2, -d / 2, h - top}, {w / 2, d / 2, h});
            const double inset = 0.5 * leg;
            for (int sx : {-1, 1}) {
                for (int sy : {-1, 1}) {
                    const double cx = sx * (w / 2 - inset - leg / 2), cy = sy * (d / 2 - inset - leg / 2);
                    add_box(m, {cx - leg / 2, cy - leg / 2, 0}, {cx + leg / 2, cy + leg / 2, h - top});
                }
            }
            break;
        }
    }
    center_on_bounds(m);
    compute_vertex_normals(m);
    cylindrical_uvs(m);
    validate_mesh(m);
    return m;
}

TriMesh parse_ascii_mesh(std::string_view text) {
    TriMesh m;
    std::vector<Vec2> uvs;
    std::vector<Vec3> normals;
    std::vector<int> uv_of, normal_of;  // per position, -1 = unset
    std::size_t line_no = 0;

    auto fail = [&](const std::string& msg) -> void {
        throw CatalogError(CatalogError::Kind::Parse, "mesh line " + std::to_string(line_no) + ": " + msg);
    };
    auto resolve = [&](long idx, std::size_t count) -> std::size_t {
        const long r = idx < 0 ? static_cast<long>(count) + idx : idx - 1;
        if (idx == 0 || r < 0 || static_cast<std::size_t>(r) >= count) fail("index out of range");
        return static_cast<std::size_t>(r);
    };

    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string line(text.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::istringstream in(line);
        std::string tag;
        if (!(in >> tag)) continue;
        if (tag == "v" || tag == "vn") {
            Vec3 p;
            if (!(in >> p.x >> p.y >> p.z)) fail("expected three numbers");
            if (tag == "v") {
                m.vertices.push_back(p);
                uv_of.push_back(-1);
                normal_of.push_back(-1);
            } else {
                normals.push_back(p);
            }
        } else if (tag == "vt") {
            Vec2 t;
            if (!(in >> t.x >> t.y)) fail("expected two numbers");
            uvs.push_back(t);
        } else if (tag == "f") {
            std::vector<std::uint32_t> corners;
            std::string ref;
            while (in >> ref) {
                long vi = 0, ti = 0, ni = 0;
                char* cursor = ref.data();
                vi = std::strtol(cursor, &cursor, 10);
                if (*cursor == '/') {
                    ++cursor;
                    if (*cursor != '/') ti = std::strtol(cursor, &cursor, 10);
                    if (*cursor == '/') ni = std::strtol(cursor + 1, &cursor, 10);
                }
                if (*cursor != '\0') fail("malformed face reference '" + ref + "'");
                const auto v = resolve(vi, m.vertices.size());
                if (ti != 0 && uv_of[v] < 0) uv_of[v] = static_cast<int>(resolve(ti, uvs.size()));
                if (ni != 0 && normal_of[v] < 0) normal_of[v] = static_cast<int>(resolve(ni, normals.size()));
                corners.push_back(static_cast<std::uint32_t>(v));
            }
            if (corners.size() < 3) fail("face needs at least three vertices");
            for (std::size_t i = 1; i + 1 < corners.size(); ++i)
                m.triangles.push_back({corners[0], corners[i], corners[i + 1]});
        }
    }
    if (m.empty()) throw CatalogError(CatalogError::Kind::Parse, "mesh has no faces");

    const bool have_normals = std::all_of(normal_of.begin(), normal_of.end(), [](int i) { return i >= 0; });
    if (have_normals) {
        for (std::size_t i = 0; i < m.vertices.size(); ++i) m.normals.push_back(normalize(normals[normal_of[i]]));
    } else {
        compute_vertex_normals(m);
    }
    const bool have_uvs = std::all_of(uv_of.begin(), uv_of.end(), [](int i) { return i >= 0; });
    if (have_uvs) {
        for (std::size_t i = 0; i < m.vertices.size(); ++i) {
            const Vec2 t = uvs[uv_of[i]];
            m.uv.push_back({std::clamp(t.x, 0.0, 1.0), std::clamp(t.y, 0.0, 1.0)});
        }
    } else {
        const Aabb box = bounds(m.vertices);
        const Vec3 ext = box.extent();
        for (const auto& v : m.vertices)
            m.uv.push_back({ext.x > 0 ? (v.x - box.lo.x) / ext.x : 0.0, ext.y > 0 ? (v.y - box.lo.y) / ext.y : 0.0});
    }
    try {
        validate_mesh(m);
    } catch (const GeometryError& e) {
        throw CatalogError(CatalogError::Kind::Parse, std::string("invalid mesh: ") + e.what());
    }
    return m;
}

TriMesh load_ascii_mesh(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw CatalogError(CatalogError::Kind::MissingFile, "cannot open mesh file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_ascii_mesh(buffer.str());
}

}  // namespace forge
