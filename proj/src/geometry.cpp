#include "forge/geometry.hpp"

#include <algorithm>
#include <string>

#include "forge/error.hpp"

namespace forge {

Quat Quat::from_axis_angle(Vec3 axis, double radians) noexcept {
    const Vec3 a = normalize(axis);
    const double h = 0.5 * radians;
    const double s = std::sin(h);
    return {std::cos(h), a.x * s, a.y * s, a.z * s};
}

Quat Quat::between(Vec3 from, Vec3 to) noexcept {
    const double d = dot(from, to);
    if (d < -1.0 + 1e-12) {
        // Antiparallel: half turn about any axis orthogonal to `from`.
        Vec3 axis = cross(from, Vec3{1, 0, 0});
        if (dot(axis, axis) < 1e-12) axis = cross(from, Vec3{0, 1, 0});
        return from_axis_angle(axis, kPi);
    }
    const Vec3 c = cross(from, to);
    return Quat{1.0 + d, c.x, c.y, c.z}.normalized();
}

Quat Quat::normalized() const noexcept {
    const double n = norm();
    return {w / n, x / n, y / n, z / n};
}

Vec3 Quat::rotate(Vec3 v) const noexcept {
    // v' = v + 2w(q x v) + 2 q x (q x v)
    const Vec3 q{x, y, z};
    const Vec3 t = cross(q, v) * 2.0;
    return v + t * w + cross(q, t);
}

Quat operator*(const Quat& a, const Quat& b) noexcept {
    return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

void validate_mesh(const TriMesh& mesh) {
    if (mesh.empty()) throw GeometryError("mesh is empty");
    const auto n = mesh.vertices.size();
    for (const auto& v : mesh.vertices)
        if (!is_finite(v)) throw GeometryError("mesh has a non-finite vertex");
    for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
        const auto& t = mesh.triangles[i];
        if (t[0] >= n || t[1] >= n || t[2] >= n)
            throw GeometryError("triangle " + std::to_string(i) + " has an out-of-range index");
        if (triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]) <= 1e-12)
            throw GeometryError("triangle " + std::to_string(i) + " is degenerate");
    }
    if (!mesh.uv.empty() && mesh.uv.size() != n) throw GeometryError("uv count does not match vertex count");
    if (!mesh.normals.empty() && mesh.normals.size() != n)
        throw GeometryError("normal count does not match vertex count");
}

Aabb bounds(std::span<const Vec3> points) noexcept {
    Aabb box;
    for (const auto& p : points) box.grow(p);
    return box;
}

double triangle_area(Vec3 a, Vec3 b, Vec3 c) noexcept { return 0.5 * length(cross(b - a, c - a)); }

namespace {

// Reference point for the volume integrals; keeps them well-conditioned
// for meshes far from the origin.
Vec3 reference_point(const TriMesh& mesh) noexcept { return bounds(mesh.vertices).center(); }

}  // namespace

double signed_volume(const TriMesh& mesh) noexcept {
    const Vec3 o = reference_point(mesh);
    double vol = 0;
    for (const auto& t : mesh.triangles) {
        const Vec3 a = mesh.vertices[t[0]] - o, b = mesh.vertices[t[1]] - o, c = mesh.vertices[t[2]] - o;
        vol += dot(a, cross(b, c));
    }
    return vol / 6.0;
}

double surface_area(const TriMesh& mesh) noexcept {
    double area = 0;
    for (const auto& t : mesh.triangles)
        area += triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
    return area;
}

Vec3 center_of_mass(const TriMesh& mesh) {
    if (mesh.empty()) throw GeometryError("center_of_mass: mesh is empty");
    const Vec3 o = reference_point(mesh);
    double vol = 0;
    Vec3 moment;
    for (const auto& t : mesh.triangles) {
        const Vec3 a = mesh.vertices[t[0]] - o, b = mesh.vertices[t[1]] - o, c = mesh.vertices[t[2]] - o;
        const double v = dot(a, cross(b, c));
        vol += v;
        moment += (a + b + c) * v;
    }
    if (std::abs(vol / 6.0) > 1e-9) return o + moment / (4.0 * vol);

    double area = 0;
    Vec3 weighted;
    for (const auto& t : mesh.triangles) {
        const Vec3 a = mesh.vertices[t[0]] - o, b = mesh.vertices[t[1]] - o, c = mesh.vertices[t[2]] - o;
        const double w = triangle_area(a, b, c);
        area += w;
        weighted += (a + b + c) * (w / 3.0);
    }
    if (area <= 0) throw GeometryError("center_of_mass: mesh has zero area");
    return o + weighted / area;
}

TriMesh transformed(const TriMesh& mesh, const Quat& rotation, double scale, Vec3 translation) {
    TriMesh out = mesh;
    for (auto& v : out.vertices) v = rotation.rotate(v * scale) + translation;
    for (auto& n : out.normals) n = rotation.rotate(n);
    return out;
}

void compute_vertex_normals(TriMesh& mesh) {
    mesh.normals.assign(mesh.vertices.size(), Vec3{});
    for (const auto& t : mesh.triangles) {
        const Vec3 n = cross(mesh.vertices[t[1]] - mesh.vertices[t[0]], mesh.vertices[t[2]] - mesh.vertices[t[0]]);
        for (auto i : t) mesh.normals[i] += n;
    }
    for (auto& n : mesh.normals) {
        const double l = length(n);
        n = l > 0 ? n / l : Vec3{0, 0, 1};
    }
}

void validate_camera(const Camera& camera) {
    if (!is_finite(camera.position) || !is_finite(camera.target)) throw GeometryError("camera has non-finite position");
    if (!(camera.position.z > 0)) throw GeometryError("camera must be above the ground plane");
    if (!(length(camera.position - camera.target) > 0)) throw GeometryError("camera position equals its target");
    if (!(camera.vertical_fov_deg > 10 && camera.vertical_fov_deg < 120))
        throw GeometryError("camera field of view must lie in (10, 120) degrees");
    if (camera.resolution.width <= 0 || camera.resolution.height <= 0)
        throw GeometryError("camera resolution must be positive");
}

CameraFrame camera_frame(const Camera& camera) {
    CameraFrame f;
    f.origin = camera.position;
    f.forward = normalize(camera.target - camera.position);
    Vec3 right = cross(f.forward, camera.up);
    if (dot(right, right) < 1e-18) right = cross(f.forward, Vec3{0, 1, 0});
    f.right = normalize(right);
    f.up = cross(f.right, f.forward);
    f.tan_half_fov = std::tan(deg_to_rad(camera.vertical_fov_deg) * 0.5);
    f.aspect = static_cast<double>(camera.resolution.width) / camera.resolution.height;
    return f;
}

double camera_distance(const Camera& camera) noexcept { return length(camera.position - camera.target); }

double camera_elevation_deg(const Camera& camera) noexcept {
    const Vec3 d = camera.position - camera.target;
    return rad_to_deg(std::asin(std::clamp(d.z / length(d), -1.0, 1.0)));
}

double camera_azimuth_deg(const Camera& camera) noexcept {
    const Vec3 d = camera.position - camera.target;
    double a = rad_to_deg(std::atan2(d.y, d.x));
    if (a < 0) a += 360.0;
    return a;
}

std::optional<ImageCoord> project(const Camera& camera, Vec3 p) {
    const CameraFrame f = camera_frame(camera);
    const Vec3 d = p - f.origin;
    const double z = dot(d, f.forward);
    if (!(z > 1e-12)) return std::nullopt;
    return ImageCoord{0.5 + 0.5 * dot(d, f.right) / (z * f.tan_half_fov * f.aspect),
                      0.5 + 0.5 * dot(d, f.up) / (z * f.tan_half_fov)};
}

double view_depth(const Camera& camera, Vec3 p) {
    const CameraFrame f = camera_frame(camera);
    return dot(p - f.origin, f.forward);
}

std::optional<Vec3> unproject_to_ground(const Camera& camera, ImageCoord c) {
    const CameraFrame f = camera_frame(camera);
    const Vec3 dir = f.ray_direction(c);
    if (!(dir.z < -1e-12)) return std::nullopt;
    const double t = -f.origin.z / dir.z;
    Vec3 g = f.origin + dir * t;
    g.z = 0;
    return g;
}

Circle circumcircle(const Footprint& f) noexcept {
    return {f.center, std::hypot(f.half_extents.x, f.half_extents.y)};
}

bool circles_intersect(const Circle& a, const Circle& b) noexcept {
    return length(a.center - b.center) < a.radius + b.radius;
}

Footprint footprint_of(std::span<const Vec3> points) noexcept {
    const Aabb box = bounds(points);
    return {{0.5 * (box.lo.x + box.hi.x), 0.5 * (box.lo.y + box.hi.y)},
            {0.5 * (box.hi.x - box.lo.x), 0.5 * (box.hi.y - box.lo.y)}};
}

}  // namespace forge
