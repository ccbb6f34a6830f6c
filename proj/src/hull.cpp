#include "forge/hull.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <unordered_map>

#include "forge/error.hpp"
#include "forge/rng.hpp"

namespace forge {

std::vector<Vec2> convex_hull_2d(std::span<const Vec2> input) {
    std::vector<Vec2> pts(input.begin(), input.end());
    std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;

    std::vector<Vec2> hull(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
        hull[k++] = pts[i];
    }
    for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

namespace {

double segment_distance(Vec2 a, Vec2 b, Vec2 p) noexcept {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    const double t = len2 > 0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
    return length(p - (a + ab * t));
}

}  // namespace

double convex_polygon_depth(std::span<const Vec2> polygon, Vec2 p) noexcept {
    if (polygon.empty()) return -1e300;
    if (polygon.size() == 1) return -length(p - polygon[0]);
    if (polygon.size() == 2) return -segment_distance(polygon[0], polygon[1], p);
    double depth = 1e300;
    bool inside = true;
    double outside = 1e300;
    for (std::size_t i = 0; i < polygon.size(); ++i) {
        const Vec2 a = polygon[i], b = polygon[(i + 1) % polygon.size()];
        const Vec2 e = b - a;
        const double d = cross(e, p - a) / length(e);
        depth = std::min(depth, d);
        if (d < 0) inside = false;
        outside = std::min(outside, segment_distance(a, b, p));
    }
    return inside ? depth : -outside;
}

namespace {

struct Face {
    std::uint32_t v[3];
    Vec3 normal;
    double offset = 0;
    bool alive = true;
    std::vector<std::uint32_t> outside;
};

std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) noexcept {
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

class Quickhull {
public:
    Quickhull(std::span<const Vec3> pts, double eps) : p_(pts), eps_(eps) {}

    // Returns false when the input is (near) coplanar.
    bool build() {
        std::uint32_t i0 = 0, i1 = 0, i2 = 0, i3 = 0;
        for (std::uint32_t i = 1; i < p_.size(); ++i)
            if (p_[i].x < p_[i0].x) i0 = i;
        double best = -1;
        for (std::uint32_t i = 0; i < p_.size(); ++i) {
            const double d = length(p_[i] - p_[i0]);
            if (d > best) best = d, i1 = i;
        }
        if (best <= eps_) throw GeometryError("convex hull: all points coincide");
        best = -1;
        const Vec3 axis = normalize(p_[i1] - p_[i0]);
        for (std::uint32_t i = 0; i < p_.size(); ++i) {
            const double d = length(cross(p_[i] - p_[i0], axis));
            if (d > best) best = d, i2 = i;
        }
        if (best <= eps_) throw GeometryError("convex hull: all points are collinear");
        const Vec3 n = normalize(cross(p_[i1] - p_[i0], p_[i2] - p_[i0]));
        best = -1;
        for (std::uint32_t i = 0; i < p_.size(); ++i) {
            const double d = std::abs(dot(p_[i] - p_[i0], n));
            if (d > best) best = d, i3 = i;
        }
        plane_normal_ = n;
        if (best <= 1e3 * eps_) return false;

        const Vec3 inner = (p_[i0] + p_[i1] + p_[i2] + p_[i3]) * 0.25;
        const std::uint32_t tet[4][3] = {{i0, i1, i2}, {i0, i1, i3}, {i0, i2, i3}, {i1, i2, i3}};
        for (const auto& t : tet) {
            std::uint32_t a = t[0], b = t[1], c = t[2];
            const Vec3 fn = cross(p_[b] - p_[a], p_[c] - p_[a]);
            if (dot(fn, inner - p_[a]) > 0) std::swap(b, c);
            add_face(a, b, c);
        }
        for (std::uint32_t i = 0; i < p_.size(); ++i) {
            if (i == i0 || i == i1 || i == i2 || i == i3) continue;
            static constexpr std::uint32_t kInitial[4] = {0, 1, 2, 3};
            assign(i, kInitial);
        }

        std::vector<std::uint32_t> stack{0, 1, 2, 3};
        while (!stack.empty()) {
            const std::uint32_t fi = stack.back();
            stack.pop_back();
            if (!faces_[fi].alive || faces_[fi].outside.empty()) continue;
            expand(fi, stack);
        }
        return true;
    }

    const std::vector<Face>& faces() const noexcept { return faces_; }
    Vec3 plane_normal() const noexcept { return plane_normal_; }

    std::uint32_t neighbour(std::uint32_t face, int edge) const {
        const auto& f = faces_[face];
        return edges_.at(edge_key(f.v[(edge + 1) % 3], f.v[edge]));
    }

private:
    double distance(const Face& f, std::uint32_t i) const noexcept { return dot(f.normal, p_[i]) - f.offset; }

    std::uint32_t add_face(std::uint32_t a, std::uint32_t b, std::uint32_t c) {
        Face f;
        f.v[0] = a, f.v[1] = b, f.v[2] = c;
        f.normal = normalize(cross(p_[b] - p_[a], p_[c] - p_[a]));
        f.offset = dot(f.normal, p_[a]);
        const auto id = static_cast<std::uint32_t>(faces_.size());
        faces_.push_back(std::move(f));
        edges_[edge_key(a, b)] = id;
        edges_[edge_key(b, c)] = id;
        edges_[edge_key(c, a)] = id;
        return id;
    }

    void assign(std::uint32_t point, std::span<const std::uint32_t> candidates) {
        for (auto fi : candidates) {
            if (distance(faces_[fi], point) > eps_) {
                faces_[fi].outside.push_back(point);
                return;
            }
        }
    }

    void expand(std::uint32_t start, std::vector<std::uint32_t>& stack) {
        const auto& out = faces_[start].outside;
        std::uint32_t apex = out[0];
        double far = distance(faces_[start], apex);
        for (auto i : out) {
            const double d = distance(faces_[start], i);
            if (d > far) far = d, apex = i;
        }

        // Visible region by flood fill from the start face.
        std::vector<std::uint32_t> visible{start};
        std::unordered_map<std::uint32_t, bool> seen{{start, true}};
        for (std::size_t k = 0; k < visible.size(); ++k) {
            for (int e = 0; e < 3; ++e) {
                const std::uint32_t nb = neighbour(visible[k], e);
                if (seen.count(nb)) continue;
                const bool vis = distance(faces_[nb], apex) > eps_;
                seen[nb] = vis;
                if (vis) visible.push_back(nb);
            }
        }

        std::vector<std::pair<std::uint32_t, std::uint32_t>> horizon;
        std::vector<std::uint32_t> orphans;
        for (auto fi : visible) {
            for (int e = 0; e < 3; ++e) {
                const std::uint32_t nb = neighbour(fi, e);
                if (!seen[nb]) horizon.emplace_back(faces_[fi].v[e], faces_[fi].v[(e + 1) % 3]);
            }
        }
        for (auto fi : visible) {
            auto& f = faces_[fi];
            f.alive = false;
            for (auto i : f.outside)
                if (i != apex) orphans.push_back(i);
            f.outside.clear();
            f.outside.shrink_to_fit();
            for (int e = 0; e < 3; ++e) {
                const auto key = edge_key(f.v[e], f.v[(e + 1) % 3]);
                auto it = edges_.find(key);
                if (it != edges_.end() && it->second == fi) edges_.erase(it);
            }
        }

        std::vector<std::uint32_t> created;
        created.reserve(horizon.size());
        for (auto [a, b] : horizon) created.push_back(add_face(a, b, apex));
        for (auto i : orphans) assign(i, created);
        for (auto fi : created)
            if (!faces_[fi].outside.empty()) stack.push_back(fi);
    }

    std::span<const Vec3> p_;
    double eps_;
    Vec3 plane_normal_;
    std::vector<Face> faces_;
    std::unordered_map<std::uint64_t, std::uint32_t> edges_;
};

struct PlaneBasis {
    Vec3 u, v;
};

PlaneBasis basis_for(Vec3 n) noexcept {
    const Vec3 helper = std::abs(n.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    const Vec3 u = normalize(cross(helper, n));
    return {u, cross(n, u)};
}

// Facet polygon from a set of points lying (approximately) in the plane.
std::vector<Vec3> facet_polygon(std::span<const Vec3> pts, Vec3 n, double offset) {
    const auto [u, v] = basis_for(n);
    std::vector<Vec2> flat;
    flat.reserve(pts.size());
    for (const auto& p : pts) flat.push_back({dot(p, u), dot(p, v)});
    const auto hull = convex_hull_2d(flat);
    std::vector<Vec3> out;
    out.reserve(hull.size());
    for (const auto& q : hull) out.push_back(u * q.x + v * q.y + n * offset);
    return out;
}

std::uint32_t find_root(std::vector<std::uint32_t>& parent, std::uint32_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
}

}  // namespace

std::vector<HullFacet> convex_hull_facets(std::span<const Vec3> input) {
    if (input.size() < 3) throw GeometryError("convex hull: fewer than three points");

    // Distinct points only.
    std::vector<Vec3> pts(input.begin(), input.end());
    std::sort(pts.begin(), pts.end(), [](Vec3 a, Vec3 b) {
        return a.x < b.x || (a.x == b.x && (a.y < b.y || (a.y == b.y && a.z < b.z)));
    });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    const Aabb box = bounds(pts);
    const double scale = std::max(length(box.extent()), 1e-300);

    // Jitter would hide collinearity, so test it on the raw points.
    {
        std::size_t far = 0;
        for (std::size_t i = 1; i < pts.size(); ++i)
            if (length(pts[i] - pts[0]) > length(pts[far] - pts[0])) far = i;
        const Vec3 axis = pts[far] - pts[0];
        double off_line = 0;
        if (length(axis) > 0)
            for (const Vec3& p : pts) off_line = std::max(off_line, length(cross(p - pts[0], axis)) / length(axis));
        if (off_line <= 1e-9 * scale) throw GeometryError("convex hull: all points are collinear");
    }

    const double jitter = 1e-9 * scale;
    std::vector<Vec3> jittered(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        Rng r(hash_combine(0x68756c6cULL, i));
        jittered[i] = pts[i] + Vec3{r.uniform(-1, 1), r.uniform(-1, 1), r.uniform(-1, 1)} * jitter;
    }

    Quickhull qh(jittered, 1e-13 * scale);
    if (!qh.build()) {
        const Vec3 n = qh.plane_normal();
        const double offset = dot(n, pts[0]);
        HullFacet up{n, offset, facet_polygon(pts, n, offset)};
        HullFacet down{-n, -offset, facet_polygon(pts, -n, -offset)};
        if (up.polygon.size() < 3) throw GeometryError("convex hull: all points are collinear");
        return {std::move(up), std::move(down)};
    }

    // Merge adjacent faces whose planes agree.
    const auto& faces = qh.faces();
    std::vector<std::uint32_t> parent(faces.size());
    std::iota(parent.begin(), parent.end(), 0u);
    const double plane_tol = 1e-7 * scale;
    for (std::uint32_t fi = 0; fi < faces.size(); ++fi) {
        if (!faces[fi].alive) continue;
        for (int e = 0; e < 3; ++e) {
            const std::uint32_t nb = qh.neighbour(fi, e);
            if (nb < fi) continue;
            const auto& f = faces[fi];
            const auto& g = faces[nb];
            if (dot(f.normal, g.normal) < 1.0 - 1e-12) continue;
            bool coplanar = true;
            for (auto vi : g.v) coplanar &= std::abs(dot(f.normal, jittered[vi]) - f.offset) <= plane_tol;
            if (coplanar) parent[find_root(parent, nb)] = find_root(parent, fi);
        }
    }

    std::vector<std::int64_t> group_of(faces.size(), -1);
    std::vector<std::vector<std::uint32_t>> groups;
    for (std::uint32_t fi = 0; fi < faces.size(); ++fi) {
        if (!faces[fi].alive) continue;
        const auto root = find_root(parent, fi);
        if (group_of[root] < 0) {
            group_of[root] = static_cast<std::int64_t>(groups.size());
            groups.emplace_back();
        }
        groups[group_of[root]].push_back(fi);
    }

    std::vector<HullFacet> facets;
    facets.reserve(groups.size());
    for (const auto& group : groups) {
        Vec3 weighted;
        std::vector<Vec3> members;
        for (auto fi : group) {
            const auto& f = faces[fi];
            const Vec3 a = pts[f.v[0]], b = pts[f.v[1]], c = pts[f.v[2]];
            weighted += cross(b - a, c - a);
            members.insert(members.end(), {a, b, c});
        }
        const double area2 = length(weighted);
        if (area2 <= 1e-12 * scale * scale) continue;  // slivers only
        const Vec3 n = weighted / area2;
        double offset = -1e300;
        for (const auto& m : members) offset = std::max(offset, dot(n, m));
        auto polygon = facet_polygon(members, n, offset);
        if (polygon.size() < 3) continue;
        facets.push_back({n, offset, std::move(polygon)});
    }
    return facets;
}

}  // namespace forge
