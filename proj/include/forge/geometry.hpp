#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace forge {

inline constexpr double kPi = 3.14159265358979323846;

constexpr double deg_to_rad(double deg) noexcept { return deg * (kPi / 180.0); }
constexpr double rad_to_deg(double rad) noexcept { return rad * (180.0 / kPi); }

struct Vec2 {
    double x = 0, y = 0;

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) noexcept { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) noexcept { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator*(Vec2 a, double s) noexcept { return {a.x * s, a.y * s}; }
    friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr double dot(Vec2 a, Vec2 b) noexcept { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) noexcept { return a.x * b.y - a.y * b.x; }
inline double length(Vec2 a) noexcept { return std::hypot(a.x, a.y); }

/// Point or direction in scene units; the ground plane is z = 0.
struct Vec3 {
    double x = 0, y = 0, z = 0;

    constexpr double operator[](int i) const noexcept { return i == 0 ? x : (i == 1 ? y : z); }
    constexpr double& operator[](int i) noexcept { return i == 0 ? x : (i == 1 ? y : z); }

    constexpr Vec3& operator+=(Vec3 o) noexcept { x += o.x; y += o.y; z += o.z; return *this; }
    constexpr Vec3& operator-=(Vec3 o) noexcept { x -= o.x; y -= o.y; z -= o.z; return *this; }
    constexpr Vec3& operator*=(double s) noexcept { x *= s; y *= s; z *= s; return *this; }

    friend constexpr Vec3 operator+(Vec3 a, Vec3 b) noexcept { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend constexpr Vec3 operator-(Vec3 a, Vec3 b) noexcept { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend constexpr Vec3 operator-(Vec3 a) noexcept { return {-a.x, -a.y, -a.z}; }
    friend constexpr Vec3 operator*(Vec3 a, double s) noexcept { return {a.x * s, a.y * s, a.z * s}; }
    friend constexpr Vec3 operator*(double s, Vec3 a) noexcept { return a * s; }
    friend constexpr Vec3 operator/(Vec3 a, double s) noexcept { return {a.x / s, a.y / s, a.z / s}; }
    friend constexpr bool operator==(Vec3, Vec3) = default;
};

constexpr double dot(Vec3 a, Vec3 b) noexcept { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(Vec3 a, Vec3 b) noexcept {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double length(Vec3 a) noexcept { return std::sqrt(dot(a, a)); }
inline Vec3 normalize(Vec3 a) noexcept { return a / length(a); }
constexpr Vec3 hadamard(Vec3 a, Vec3 b) noexcept { return {a.x * b.x, a.y * b.y, a.z * b.z}; }
inline bool is_finite(Vec3 a) noexcept {
    return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}

/// Unit quaternion, w + xi + yj + zk.
struct Quat {
    double w = 1, x = 0, y = 0, z = 0;

    static Quat identity() noexcept { return {}; }
    static Quat from_axis_angle(Vec3 axis, double radians) noexcept;
    /// Counter-clockwise (right-handed) rotation about +z, seen from above.
    static Quat rot_z(double radians) noexcept { return from_axis_angle({0, 0, 1}, radians); }
    /// Shortest rotation taking unit vector `from` onto unit vector `to`.
    static Quat between(Vec3 from, Vec3 to) noexcept;

    double norm() const noexcept { return std::sqrt(w * w + x * x + y * y + z * z); }
    Quat normalized() const noexcept;
    Quat conjugate() const noexcept { return {w, -x, -y, -z}; }
    Vec3 rotate(Vec3 v) const noexcept;

    friend Quat operator*(const Quat& a, const Quat& b) noexcept;
    friend constexpr bool operator==(const Quat&, const Quat&) = default;
};

/// world = rotation * (scale * local) + translation, with scale applied by
/// the owner (PlacedObject); RigidPose itself is scale-free.
struct RigidPose {
    Quat rotation;
    Vec3 translation;

    Vec3 apply(Vec3 p) const noexcept { return rotation.rotate(p) + translation; }
    bool valid() const noexcept { return std::abs(rotation.norm() - 1.0) <= 1e-9 && is_finite(translation); }
    friend constexpr bool operator==(const RigidPose&, const RigidPose&) = default;
};

using Tri = std::array<std::uint32_t, 3>;

struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<Tri> triangles;
    std::vector<Vec2> uv;          // per vertex, in [0,1]^2
    std::vector<Vec3> normals;     // per vertex, outward
    bool smooth = false;           // interpolate vertex normals when shading

    bool empty() const noexcept { return vertices.empty() || triangles.empty(); }
    friend bool operator==(const TriMesh&, const TriMesh&) = default;
};

struct Aabb {
    Vec3 lo{1e300, 1e300, 1e300};
    Vec3 hi{-1e300, -1e300, -1e300};

    void grow(Vec3 p) noexcept {
        lo = {std::fmin(lo.x, p.x), std::fmin(lo.y, p.y), std::fmin(lo.z, p.z)};
        hi = {std::fmax(hi.x, p.x), std::fmax(hi.y, p.y), std::fmax(hi.z, p.z)};
    }
    void grow(const Aabb& b) noexcept { grow(b.lo); grow(b.hi); }
    Vec3 extent() const noexcept { return hi - lo; }
    Vec3 center() const noexcept { return (lo + hi) * 0.5; }
};

/// Validates index range and non-degeneracy (area > 1e-12). Throws GeometryError.
void validate_mesh(const TriMesh& mesh);

Aabb bounds(std::span<const Vec3> points) noexcept;
double triangle_area(Vec3 a, Vec3 b, Vec3 c) noexcept;
double signed_volume(const TriMesh& mesh) noexcept;
double surface_area(const TriMesh& mesh) noexcept;

/// Mass centroid of the enclosed solid; the area-weighted surface centroid
/// when |signed volume| <= 1e-9 (open or flat meshes). Throws on empty mesh.
Vec3 center_of_mass(const TriMesh& mesh);

/// Applies rotation, then uniform scale, then translation to every vertex
/// and normal. Triangles and UVs are copied unchanged.
TriMesh transformed(const TriMesh& mesh, const Quat& rotation, double scale, Vec3 translation);

/// Recomputes area-weighted vertex normals from the triangle winding.
void compute_vertex_normals(TriMesh& mesh);

/// Normalized image coordinate: (0,0) bottom-left, (1,1) top-right.
struct ImageCoord {
    double x = 0, y = 0;
    bool inside_unit() const noexcept { return x >= 0 && x <= 1 && y >= 0 && y <= 1; }
    friend constexpr bool operator==(ImageCoord, ImageCoord) = default;
};

struct Resolution {
    int width = 256;
    int height = 256;
    friend constexpr bool operator==(Resolution, Resolution) = default;
};

/// Pinhole camera aimed at `target` (the world origin for all sampled
/// cameras).
struct Camera {
    Vec3 position{0, -6, 4};
    Vec3 target{0, 0, 0};
    Vec3 up{0, 0, 1};
    double vertical_fov_deg = 50.0;
    Resolution resolution;

    friend constexpr bool operator==(const Camera&, const Camera&) = default;
};

/// Orthonormal view frame. When `up` is parallel to the view direction the
/// frame falls back to +y as up.
struct CameraFrame {
    Vec3 origin, forward, right, up;
    double tan_half_fov = 0;
    double aspect = 1;

    /// World-space (unnormalized) ray direction through an image coordinate.
    Vec3 ray_direction(ImageCoord c) const noexcept {
        return forward + right * ((2 * c.x - 1) * tan_half_fov * aspect) + up * ((2 * c.y - 1) * tan_half_fov);
    }
};

/// Throws GeometryError when the camera violates its invariants.
void validate_camera(const Camera& camera);
CameraFrame camera_frame(const Camera& camera);

double camera_elevation_deg(const Camera& camera) noexcept;
double camera_azimuth_deg(const Camera& camera) noexcept;
double camera_distance(const Camera& camera) noexcept;

/// Perspective projection. nullopt when the point is at or behind the
/// camera plane. Coordinates outside [0,1]^2 are returned as-is.
std::optional<ImageCoord> project(const Camera& camera, Vec3 p);

/// Depth of p along the viewing axis.
double view_depth(const Camera& camera, Vec3 p);

/// Intersection of the viewing ray through c with the plane z = 0, or
/// nullopt when the ray does not point below the horizon.
std::optional<Vec3> unproject_to_ground(const Camera& camera, ImageCoord c);

/// Axis-aligned x-y bounding box of a placed object.
struct Footprint {
    Vec2 center;
    Vec2 half_extents{0.5, 0.5};

    double longest_side() const noexcept { return 2 * std::fmax(half_extents.x, half_extents.y); }
    friend constexpr bool operator==(const Footprint&, const Footprint&) = default;
};

struct Circle {
    Vec2 center;
    double radius = 0;
};

Circle circumcircle(const Footprint& f) noexcept;
/// Strict: circles that only touch do not intersect.
bool circles_intersect(const Circle& a, const Circle& b) noexcept;

/// x-y bounds of a point set as a footprint.
Footprint footprint_of(std::span<const Vec3> points) noexcept;

}  // namespace forge
