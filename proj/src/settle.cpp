#include "forge/settle.hpp"

#include <algorithm>
#include <string>

#include "forge/error.hpp"
#include "forge/hull.hpp"

namespace forge {

namespace {

struct Candidate {
    std::size_t facet;
    double height;
};

Vec2 in_plane(Vec3 p, Vec3 u, Vec3 v) noexcept { return {dot(p, u), dot(p, v)}; }

}  // namespace

RestingPose settle(const TriMesh& mesh, Rng* rng, const SettleOptions& options) {
    if (mesh.empty()) throw GeometryError("settle: mesh is empty");
    const Vec3 com = center_of_mass(mesh);
    const auto facets = convex_hull_facets(mesh.vertices);

    std::vector<Candidate> stable;
    for (std::size_t i = 0; i < facets.size(); ++i) {
        const auto& f = facets[i];
        const Vec3 helper = std::abs(f.normal.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
        const Vec3 u = normalize(cross(helper, f.normal));
        const Vec3 v = cross(f.normal, u);
        std::vector<Vec2> poly;
        poly.reserve(f.polygon.size());
        for (const auto& p : f.polygon) poly.push_back(in_plane(p, u, v));
        if (convex_polygon_depth(poly, in_plane(com, u, v)) < options.stability_margin) continue;
        stable.push_back({i, f.offset - dot(f.normal, com)});
    }
    if (stable.empty()) throw GeometryError("settle: no stable resting face");

    double lowest = stable.front().height;
    for (const auto& c : stable) lowest = std::min(lowest, c.height);
    std::vector<std::size_t> ties;
    for (const auto& c : stable)
        if (c.height <= lowest + options.tie_tolerance) ties.push_back(c.facet);
    const std::size_t chosen = rng ? ties[rng->below(ties.size())] : ties.front();

    RestingPose pose;
    pose.rotation = Quat::between(facets[chosen].normal, Vec3{0, 0, -1});
    double min_z = 1e300;
    for (const auto& p : mesh.vertices) min_z = std::min(min_z, pose.rotation.rotate(p).z);
    pose.z_offset = -min_z;

    if (auto violation = check_resting(mesh, pose, 1e-9))
        throw GeometryError("settle produced an invalid pose: " + *violation);
    return pose;
}

std::vector<Vec2> support_polygon(const TriMesh& mesh, const RestingPose& pose, double contact_tol) {
    std::vector<Vec2> contacts;
    for (const auto& p : mesh.vertices) {
        const Vec3 w = pose.apply(p);
        if (w.z < contact_tol) contacts.push_back({w.x, w.y});
    }
    if (contacts.empty()) throw GeometryError("support_polygon: no vertex touches the plane");
    return convex_hull_2d(contacts);
}

std::optional<std::string> check_resting(const TriMesh& mesh, const RestingPose& pose, double tol) {
    if (mesh.empty()) return "mesh is empty";
    double min_z = 1e300;
    for (const auto& p : mesh.vertices) min_z = std::min(min_z, pose.apply(p).z);
    if (std::abs(min_z) > tol) return "lowest vertex is at z = " + std::to_string(min_z);
    const Vec3 com = pose.apply(center_of_mass(mesh));
    const auto support = support_polygon(mesh, pose);
    if (!(convex_polygon_depth(support, {com.x, com.y}) > 0))
        return "center of mass does not project inside the support polygon";
    return std::nullopt;
}

}  // namespace forge
