#pragma once

#include <optional>
#include <vector>

#include "forge/geometry.hpp"
#include "forge/rng.hpp"

namespace forge {

/// Orientation and lift that rest a mesh on the z = 0 plane:
/// world = rotation * local + (0, 0, z_offset).
struct RestingPose {
    Quat rotation;
    double z_offset = 0;

    Vec3 apply(Vec3 p) const noexcept { return rotation.rotate(p) + Vec3{0, 0, z_offset}; }
    friend constexpr bool operator==(const RestingPose&, const RestingPose&) = default;
};

struct SettleOptions {
    double stability_margin = 1e-4;  // centroid must be this far inside the support face
    double tie_tolerance = 1e-9;     // candidate heights closer than this are ties
};

/// Quasi-static resting pose: every convex-hull facet is a candidate base;
/// a candidate is stable when the center of mass projects at least
/// `stability_margin` inside the facet; the stable candidate with the lowest
/// center of mass wins, ties going to the lowest facet index. Passing an rng
/// picks uniformly among tied candidates instead.
///
/// Throws GeometryError for empty meshes and when no facet is stable.
RestingPose settle(const TriMesh& mesh, Rng* rng = nullptr, const SettleOptions& options = {});

/// Contact polygon in x-y: 2D hull of vertices with posed z < contact_tol.
/// Throws GeometryError when nothing touches the plane.
std::vector<Vec2> support_polygon(const TriMesh& mesh, const RestingPose& pose, double contact_tol = 1e-6);

/// Checks both resting invariants (min z = 0 within `tol`, center of mass
/// strictly over the support polygon). Returns a description of the first
/// violation, or nullopt.
std::optional<std::string> check_resting(const TriMesh& mesh, const RestingPose& pose, double tol = 1e-9);

}  // namespace forge
