#pragma once

#include <span>
#include <vector>

#include "forge/geometry.hpp"

namespace forge {

/// Counter-clockwise convex hull (Andrew's monotone chain). Collinear
/// boundary points are dropped; a single distinct input point yields a
/// one-vertex polygon, two yield a segment.
std::vector<Vec2> convex_hull_2d(std::span<const Vec2> points);

/// Signed distance from p to the boundary of a CCW convex polygon;
/// positive inside. Polygons with fewer than three vertices report the
/// negated distance to the point/segment.
double convex_polygon_depth(std::span<const Vec2> polygon, Vec2 p) noexcept;

/// One planar face of a 3D convex hull, with coplanar triangles merged.
struct HullFacet {
    Vec3 normal;                  // outward unit normal
    double offset = 0;            // plane: dot(normal, x) = offset
    std::vector<Vec3> polygon;    // CCW about `normal`
};

/// Facets of the convex hull of `points`.
///
/// Built with quickhull on a deterministically jittered copy of the input
/// (relative size 1e-9) so coincident and collinear inputs never produce
/// degenerate triangles; facet planes and polygons are recomputed from the
/// unjittered points. A coplanar input yields the two sides of the plane.
/// Throws GeometryError when the points are collinear or coincident.
std::vector<HullFacet> convex_hull_facets(std::span<const Vec3> points);

}  // namespace forge
