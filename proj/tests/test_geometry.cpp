#include <doctest.h>

#include <array>
#include <cmath>

#include "forge/error.hpp"
#include "forge/geometry.hpp"
#include "forge/hull.hpp"
#include "forge/rng.hpp"

using namespace forge;

namespace {

using Mat4 = std::array<std::array<double, 4>, 4>;

Mat4 mul(const Mat4& a, const Mat4& b) {
    Mat4 r{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k) r[i][j] += a[i][k] * b[k][j];
    return r;
}

// Textbook look-at and perspective matrices, written out longhand.
Mat4 look_at(Vec3 eye, Vec3 target, Vec3 up) {
    const Vec3 f = normalize(target - eye);
    const Vec3 s = normalize(cross(f, up));
    const Vec3 u = cross(s, f);
    return {{{s.x, s.y, s.z, -dot(s, eye)},
             {u.x, u.y, u.z, -dot(u, eye)},
             {-f.x, -f.y, -f.z, dot(f, eye)},
             {0, 0, 0, 1}}};
}

Mat4 perspective(double fovy_deg, double aspect, double znear, double zfar) {
    const double f = 1.0 / std::tan(deg_to_rad(fovy_deg) / 2);
    return {{{f / aspect, 0, 0, 0},
             {0, f, 0, 0},
             {0, 0, (zfar + znear) / (znear - zfar), 2 * zfar * znear / (znear - zfar)},
             {0, 0, -1, 0}}};
}

ImageCoord matrix_project(const Camera& cam, Vec3 p) {
    const double aspect = double(cam.resolution.width) / cam.resolution.height;
    const Mat4 m = mul(perspective(cam.vertical_fov_deg, aspect, 0.1, 100), look_at(cam.position, cam.target, cam.up));
    const double v[4] = {p.x, p.y, p.z, 1};
    double clip[4] = {0, 0, 0, 0};
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k) clip[i] += m[i][k] * v[k];
    return {(clip[0] / clip[3] + 1) / 2, (clip[1] / clip[3] + 1) / 2};
}

TriMesh box_mesh(Vec3 lo, Vec3 hi) {
    TriMesh m;
    for (int i = 0; i < 8; ++i)
        m.vertices.push_back({i & 1 ? hi.x : lo.x, i & 2 ? hi.y : lo.y, i & 4 ? hi.z : lo.z});
    // Outward winding for each face of the corner-indexed cube.
    const Tri tris[12] = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
                          {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
    for (const auto& t : tris) m.triangles.push_back(t);
    return m;
}

void append(TriMesh& dst, const TriMesh& src) {
    const auto base = static_cast<std::uint32_t>(dst.vertices.size());
    dst.vertices.insert(dst.vertices.end(), src.vertices.begin(), src.vertices.end());
    for (auto t : src.triangles) dst.triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("projection of the target lands on the image center") {
    Camera cam;
    cam.position = {0, 0, 5};
    const auto c = project(cam, {0, 0, 0});
    REQUIRE(c);
    CHECK(c->x == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(c->y == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("projection agrees with a 4x4 view/projection pipeline") {
    Camera cam;
    cam.position = {0, -4, 3};
    cam.vertical_fov_deg = 60;
    for (Vec3 p : {Vec3{0, 0, 1}, Vec3{0.7, -0.3, 0.2}, Vec3{-1.5, 1.0, 0.0}, Vec3{2, 2, 1.5}}) {
        const auto got = project(cam, p);
        const auto want = matrix_project(cam, p);
        REQUIRE(got);
        CHECK(got->x == doctest::Approx(want.x).epsilon(1e-9));
        CHECK(got->y == doctest::Approx(want.y).epsilon(1e-9));
    }
    cam.resolution = {320, 200};
    const auto got = project(cam, {1, 0.5, 0.25});
    const auto want = matrix_project(cam, {1, 0.5, 0.25});
    CHECK(got->x == doctest::Approx(want.x).epsilon(1e-9));
    CHECK(got->y == doctest::Approx(want.y).epsilon(1e-9));
}

TEST_CASE("points at or behind the camera do not project") {
    Camera cam;
    cam.position = {0, -4, 3};
    CHECK_FALSE(project(cam, cam.position));
    CHECK_FALSE(project(cam, cam.position * 2.0));
}

TEST_CASE("unproject inverts project on the ground plane") {
    Camera cam;
    cam.position = {0, 0, 5};
    const auto o = unproject_to_ground(cam, {0.5, 0.5});
    REQUIRE(o);
    CHECK(length(*o) < 1e-12);

    const double el = deg_to_rad(60), az = deg_to_rad(30);
    cam.position = Vec3{std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)} * 7.0;
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const ImageCoord c{rng.uniform(), rng.uniform()};
        const auto g = unproject_to_ground(cam, c);
        REQUIRE(g);
        CHECK(std::abs(g->z) < 1e-12);
        const auto back = project(cam, *g);
        REQUIRE(back);
        CHECK(std::abs(back->x - c.x) < 1e-9);
        CHECK(std::abs(back->y - c.y) < 1e-9);
    }
}

TEST_CASE("rays above the horizon miss the ground") {
    Camera cam;
    cam.position = {0, -10, 0.5};
    CHECK_FALSE(unproject_to_ground(cam, {0.5, 1.0}));
    CHECK(unproject_to_ground(cam, {0.5, 0.0}));
}

TEST_CASE("view depth is distance along the optical axis") {
    Camera cam;
    cam.position = {0, -6, 0};
    cam.target = {0, 0, 0};
    CHECK(view_depth(cam, {0, 0, 0}) == doctest::Approx(6));
    CHECK(view_depth(cam, {1, 3, 0.5}) == doctest::Approx(9));
}

TEST_CASE("camera spherical coordinates") {
    Camera cam;
    const double el = deg_to_rad(55), az = deg_to_rad(-120);
    cam.position = Vec3{std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)} * 8.0;
    CHECK(camera_elevation_deg(cam) == doctest::Approx(55));
    CHECK(camera_distance(cam) == doctest::Approx(8));
    const double a = camera_azimuth_deg(cam);
    CHECK(std::remainder(a - (-120), 360.0) == doctest::Approx(0).epsilon(1e-9));
}

TEST_CASE("invalid cameras are rejected") {
    Camera cam;
    cam.target = cam.position;
    CHECK_THROWS_AS(validate_camera(cam), GeometryError);
    Camera fov;
    fov.vertical_fov_deg = 180;
    CHECK_THROWS_AS(validate_camera(fov), GeometryError);
}

TEST_CASE("circumcircle radius") {
    CHECK(circumcircle({{0, 0}, {1, 1}}).radius == doctest::Approx(std::sqrt(2.0)));
    CHECK(circumcircle({{0, 0}, {3, 4}}).radius == doctest::Approx(5));
    CHECK(circumcircle({{2, -1}, {0.2, 0.7}}).radius == doctest::Approx(std::sqrt(0.53)));
    CHECK(circumcircle({{2, -1}, {0.2, 0.7}}).center == Vec2{2, -1});
}

TEST_CASE("circle intersection is strict") {
    const Circle a{{0, 0}, 1};
    CHECK(circles_intersect(a, a));
    CHECK_FALSE(circles_intersect(a, {{10, 0}, 1}));
    CHECK_FALSE(circles_intersect({{0, 0}, 1.5}, {{4, 0}, 2.5}));
    CHECK(circles_intersect({{0, 0}, 1.5}, {{4, 0}, 2.5 + 1e-9}));
}

TEST_CASE("center of mass of closed meshes") {
    const TriMesh cube = box_mesh({0.5, 1.5, 0}, {1.5, 2.5, 1});
    CHECK(signed_volume(cube) == doctest::Approx(1));
    const Vec3 c = center_of_mass(cube);
    CHECK(c.x == doctest::Approx(1));
    CHECK(c.y == doctest::Approx(2));
    CHECK(c.z == doctest::Approx(0.5));

    // L from two boxes: volume-weighted average of the box centers.
    TriMesh l = box_mesh({0, 0, 0}, {2, 0.5, 1});
    append(l, box_mesh({0, 0.5, 0}, {0.5, 3, 1}));
    const double v1 = 2 * 0.5, v2 = 0.5 * 2.5;
    const Vec3 want = (Vec3{1, 0.25, 0.5} * v1 + Vec3{0.25, 1.75, 0.5} * v2) / (v1 + v2);
    const Vec3 got = center_of_mass(l);
    CHECK(got.x == doctest::Approx(want.x).epsilon(1e-12));
    CHECK(got.y == doctest::Approx(want.y).epsilon(1e-12));
    CHECK(got.z == doctest::Approx(want.z).epsilon(1e-12));
}

TEST_CASE("mesh validation") {
    TriMesh m = box_mesh({0, 0, 0}, {1, 1, 1});
    CHECK_NOTHROW(validate_mesh(m));
    m.triangles.push_back({0, 1, 99});
    CHECK_THROWS_AS(validate_mesh(m), GeometryError);
    TriMesh d = box_mesh({0, 0, 0}, {1, 1, 1});
    d.triangles.push_back({0, 0, 1});
    CHECK_THROWS_AS(validate_mesh(d), GeometryError);
    CHECK_THROWS_AS(center_of_mass(TriMesh{}), GeometryError);
}

TEST_CASE("quaternion rotations") {
    const Vec3 y = Quat::rot_z(kPi / 2).rotate({1, 0, 0});
    CHECK(y.x == doctest::Approx(0).epsilon(1e-15));
    CHECK(y.y == doctest::Approx(1));
    Rng rng(9);
    for (int i = 0; i < 50; ++i) {
        const Vec3 a = normalize({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
        const Vec3 b = normalize({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
        const Vec3 r = Quat::between(a, b).rotate(a);
        CHECK(length(r - b) < 1e-12);
    }
    const Vec3 flip = Quat::between({0, 0, 1}, {0, 0, -1}).rotate({0, 0, 1});
    CHECK(length(flip - Vec3{0, 0, -1}) < 1e-12);
}

TEST_CASE("transformed applies rotation, scale, translation in order") {
    TriMesh m;
    m.vertices = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    m.triangles = {{0, 1, 2}};
    const TriMesh t = transformed(m, Quat::rot_z(kPi / 2), 2.0, {0, 0, 3});
    CHECK(length(t.vertices[0] - Vec3{0, 2, 3}) < 1e-12);
    CHECK(length(t.vertices[2] - Vec3{0, 0, 5}) < 1e-12);
}

TEST_CASE("2d convex hull drops interior and collinear points") {
    const std::vector<Vec2> pts{{0, 0}, {1, 0}, {0.5, 0}, {1, 1}, {0, 1}, {0.5, 0.5}, {0.2, 0.7}, {1, 0.5}};
    const auto h = convex_hull_2d(pts);
    REQUIRE(h.size() == 4);
    double area = 0;
    for (std::size_t i = 0; i < h.size(); ++i) area += cross(h[i], h[(i + 1) % h.size()]);
    CHECK(area / 2 == doctest::Approx(1));  // positive: counter-clockwise
    CHECK(convex_polygon_depth(h, {0.5, 0.5}) == doctest::Approx(0.5));
    CHECK(convex_polygon_depth(h, {2, 0.5}) == doctest::Approx(-1));
}

TEST_CASE("3d hull facets of a cube merge into six quads") {
    const TriMesh cube = box_mesh({0, 0, 0}, {1, 1, 1});
    std::vector<Vec3> pts = cube.vertices;
    pts.push_back({0.5, 0.5, 0.5});
    pts.push_back({0.5, 0.5, 0});  // coplanar with the bottom face
    const auto facets = convex_hull_facets(pts);
    CHECK(facets.size() == 6);
    for (const auto& f : facets) {
        CHECK(f.polygon.size() == 4);
        CHECK(length(f.normal) == doctest::Approx(1));
        for (Vec3 p : cube.vertices) CHECK(dot(f.normal, p) <= f.offset + 1e-9);
    }
    const std::vector<Vec3> line{{0, 0, 0}, {1, 1, 1}, {2, 2, 2}};
    CHECK_THROWS_AS(convex_hull_facets(line), GeometryError);
}

TEST_CASE("rng streams are pure in key and counter") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng p(7);
    const auto d1 = p.derive({1, 2}).key();
    p.uniform();
    CHECK(p.derive({1, 2}).key() == d1);
    CHECK(p.derive({2, 1}).key() != d1);
    Rng r(5);
    int hist[6] = {};
    for (int i = 0; i < 6000; ++i) ++hist[r.below(6)];
    for (int h : hist) CHECK(std::abs(h - 1000) < 4 * std::sqrt(6000 * (1 / 6.0) * (5 / 6.0)));
}

}  // TEST_SUITE
