#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "forge/error.hpp"
#include "forge/scene.hpp"
#include "support.hpp"

using namespace forge;

namespace {

const CategorySplit& all_seen() {
    static const CategorySplit s = [] {
        CategorySplit x;
        for (const auto& c : builtin_catalog().categories()) x.seen.insert(c);
        return x;
    }();
    return s;
}

// Two-sided Kolmogorov-Smirnov statistic against a continuous CDF.
template <class Cdf>
double ks_statistic(std::vector<double> xs, Cdf cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    return d;
}

// Critical value at alpha = 0.001.
double ks_critical(std::size_t n) { return 1.949 / std::sqrt(static_cast<double>(n)); }

}  // namespace

TEST_SUITE("scene") {

TEST_CASE("sampled scenes pass the audit") {
    SamplerConfig cfg;
    Rng root(100);
    for (int i = 0; i < 300; ++i) {
        Rng rng = root.derive({static_cast<std::uint64_t>(i)});
        const SceneSpec s = sample_scene(builtin_catalog(), all_seen(), Membership::Seen, cfg, rng);
        const auto problems = audit_scene(s, cfg);
        CAPTURE(i);
        CHECK(problems.empty());
        const double el = camera_elevation_deg(s.camera);
        CHECK(el >= 40);
        CHECK(el <= 80);
        CHECK(builtin_catalog().find_floor(s.floor_id) != nullptr);
    }
}

TEST_CASE("the audit catches violations") {
    SamplerConfig cfg;
    Rng rng(1);
    SceneSpec s = sample_scene(builtin_catalog(), all_seen(), Membership::Seen, cfg, rng);
    s.camera.position = Vec3{0, -1, 0.2} * 8.0;  // elevation far below 40
    CHECK_FALSE(audit_scene(s, cfg).empty());

    const auto crate = builtin_catalog().find("crate_03");
    SceneSpec pair;
    pair.camera = s.camera;
    pair.objects.push_back(place_asset(crate, 0, 1.0, {0, 0}, 2));
    pair.objects.push_back(place_asset(crate, 0, 1.0, {0.5, 0}, 3));
    CHECK_FALSE(audit_scene(pair, cfg, AuditLevel::Edited).empty());
    pair.objects[1] = place_asset(crate, 0, 0.5, {2, 0}, 3);  // clear, but ratio 0.5
    CHECK(audit_scene(pair, cfg, AuditLevel::Edited).empty());
    pair.camera = Camera{};
    pair.camera.position = Vec3{0, -6, 6};
    CHECK_FALSE(audit_scene(pair, cfg, AuditLevel::Sampled).empty());
}

TEST_CASE("object count is uniform over min..max") {
    SamplerConfig cfg;
    Rng root(7);
    const int n = 400;
    int hist[5] = {};
    for (int i = 0; i < n; ++i) {
        Rng rng = root.derive({static_cast<std::uint64_t>(i)});
        ++hist[sample_layout(builtin_catalog(), all_seen(), Membership::Seen, cfg, rng).size()];
    }
    CHECK(hist[0] == 0);
    const double sigma = std::sqrt(n * 0.25 * 0.75);
    for (int k = 1; k <= 4; ++k) {
        CAPTURE(k);
        CHECK(std::abs(hist[k] - n / 4.0) <= 3 * sigma);
    }
}

TEST_CASE("layouts keep the circumcircle and size-ratio rules") {
    SamplerConfig cfg;
    Rng root(11);
    double max_fp_err = 0;
    for (int i = 0; i < 300; ++i) {
        Rng rng = root.derive({static_cast<std::uint64_t>(i)});
        const auto objs = sample_layout(builtin_catalog(), all_seen(), Membership::Seen, cfg, rng);
        std::vector<Footprint> fps;
        for (std::size_t a = 0; a < objs.size(); ++a) {
            fps.push_back(objs[a].footprint);
            const Footprint posed = compute_footprint(objs[a]);
            max_fp_err = std::max({max_fp_err, length(objs[a].footprint.center - posed.center),
                                   length(objs[a].footprint.half_extents - posed.half_extents)});
            CHECK(std::abs(objs[a].footprint.center.x) <= cfg.placement_half_extent + 1e-12);
            CHECK(std::abs(objs[a].footprint.center.y) <= cfg.placement_half_extent + 1e-12);
            const double side = objs[a].footprint.longest_side();
            CHECK(side >= cfg.scale_min - 1e-9);
            CHECK(side <= cfg.scale_max + 1e-9);
            for (std::size_t b = 0; b < a; ++b) {
                const Circle ca = circumcircle(objs[a].footprint), cb = circumcircle(objs[b].footprint);
                CHECK(length(ca.center - cb.center) >= ca.radius + cb.radius);
            }
        }
        if (fps.size() > 1) CHECK(size_ratio(fps) > cfg.min_size_ratio);
    }
    // The stored footprint is the posed bounding box up to rounding.
    MESSAGE("max footprint error " << max_fp_err);
    CHECK(max_fp_err <= 1e-12);
}

TEST_CASE("single objects are never rejected for size ratio") {
    SamplerConfig cfg;
    cfg.min_objects = cfg.max_objects = 1;
    cfg.min_size_ratio = 0;
    cfg.max_attempts = 1;
    Rng root(4);
    for (int i = 0; i < 100; ++i) {
        Rng rng = root.derive({static_cast<std::uint64_t>(i)});
        CHECK(sample_layout(builtin_catalog(), all_seen(), Membership::Seen, cfg, rng).size() == 1);
    }
}

TEST_CASE("an impossible layout exhausts") {
    SamplerConfig cfg;
    cfg.min_objects = cfg.max_objects = 2;
    cfg.placement_half_extent = 0.2;
    cfg.scale_min = 1.5;
    cfg.scale_max = 1.6;
    cfg.max_attempts = 300;
    Rng rng(5);
    try {
        sample_layout(builtin_catalog(), all_seen(), Membership::Seen, cfg, rng);
        FAIL("expected exhaustion");
    } catch (const ExhaustionError& e) {
        CHECK(std::string(e.what()).find("circumcircle") != std::string::npos);
    }
}

TEST_CASE("camera sampling") {
    SamplerConfig cfg;
    Rng rng(21);
    std::vector<double> el;
    for (int i = 0; i < 1000; ++i) {
        const Camera c = sample_camera(cfg, rng);
        el.push_back(camera_elevation_deg(c));
        CHECK(el.back() >= 40);
        CHECK(el.back() <= 80);
        CHECK(camera_distance(c) >= cfg.distance_min - 1e-12);
        CHECK(camera_distance(c) <= cfg.distance_max + 1e-12);
        CHECK(length(c.target) == 0);
    }
    CHECK(ks_statistic(el, [](double x) { return (x - 40) / 40; }) < ks_critical(el.size()));

    cfg.elevation_min_deg = cfg.elevation_max_deg = 60;
    for (int i = 0; i < 50; ++i) CHECK(camera_elevation_deg(sample_camera(cfg, rng)) == doctest::Approx(60).epsilon(1e-12));

    Rng a(8), b(8);
    CHECK(sample_camera(cfg, a) == sample_camera(cfg, b));
}

TEST_CASE("directional light stays inside the cone, area-uniform") {
    SamplerConfig cfg;
    const Camera cam;
    Rng rng(31);
    const double cos_max = std::cos(deg_to_rad(cfg.light_cone_deg));
    std::vector<double> cosines;
    for (int i = 0; i < 1000; ++i) {
        const Vec3 d = sample_lighting(cfg, cam, builtin_catalog(), rng).directional.direction;
        CHECK(length(d) == doctest::Approx(1));
        const double angle = rad_to_deg(std::acos(std::clamp(-d.z, -1.0, 1.0)));
        CHECK(angle <= 25 + 1e-9);
        cosines.push_back(-d.z);
    }
    CHECK(ks_statistic(cosines, [&](double c) { return (c - cos_max) / (1 - cos_max); }) <
          ks_critical(cosines.size()));

    cfg.light_cone_deg = 0;
    const Vec3 d = sample_lighting(cfg, cam, builtin_catalog(), rng).directional.direction;
    CHECK(d == Vec3{0, 0, -1});
}

TEST_CASE("the rig turns with the camera") {
    SamplerConfig cfg;
    Camera cam;
    cam.position = {6, 0, 5};
    Rng a(3), b(3);
    const LightingRig r0 = sample_lighting(cfg, cam, builtin_catalog(), a);
    const double delta = 73;
    Camera turned = cam;
    turned.position = Quat::rot_z(deg_to_rad(delta)).rotate(cam.position);
    const LightingRig r1 = sample_lighting(cfg, turned, builtin_catalog(), b);
    for (auto [l0, l1] : {std::pair{&r0.key, &r1.key}, std::pair{&r0.fill, &r1.fill}, std::pair{&r0.back, &r1.back}}) {
        const Vec3 want = Quat::rot_z(deg_to_rad(delta)).rotate(l0->light.direction);
        CHECK(length(want - l1->light.direction) < 1e-12);
    }
    CHECK(r0.fill.light.intensity < r0.key.light.intensity);
    CHECK_FALSE(r0.fill.light.casts_shadow);
    CHECK(r0.key.light.casts_shadow);
    // Key sits on the camera side, back light opposite.
    const Vec3 to_cam = normalize(Vec3{cam.position.x, cam.position.y, 0});
    CHECK(dot(-r0.key.light.direction, to_cam) > 0);
    CHECK(dot(-r0.back.light.direction, to_cam) < 0);
}

TEST_CASE("scene sampling is deterministic in the stream") {
    SamplerConfig cfg;
    Rng a(99), b(99);
    const SceneSpec s1 = sample_scene(builtin_catalog(), all_seen(), Membership::Seen, cfg, a);
    const SceneSpec s2 = sample_scene(builtin_catalog(), all_seen(), Membership::Seen, cfg, b);
    CHECK(s1 == s2);
}

TEST_CASE("placement and footprints") {
    const auto crate = builtin_catalog().find("crate_02");  // 1.2 x 0.8 x 0.7 box
    const PlacedObject p = place_asset(crate, 0, 2.0, {1, -1}, 5);
    const Aabb b = bounds(p.world_vertices());
    CHECK(b.lo.z == doctest::Approx(0).epsilon(1e-12));
    CHECK(p.footprint.center.x == doctest::Approx(1));
    CHECK(p.footprint.center.y == doctest::Approx(-1));
    const double hx = p.footprint.half_extents.x, hy = p.footprint.half_extents.y;
    CHECK(std::max(hx, hy) == doctest::Approx(1.2));
    CHECK(std::min(hx, hy) == doctest::Approx(0.8));
    CHECK(p.world_center_of_mass().z == doctest::Approx(0.7));
    const PlacedObject q = place_asset(crate, 90, 2.0, {1, -1}, 5);
    CHECK(q.footprint.half_extents.x == doctest::Approx(hy));
    CHECK(q.footprint.half_extents.y == doctest::Approx(hx));
}

TEST_CASE("sampler config validation") {
    SamplerConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.elevation_min_deg = 85;
    CHECK_THROWS_AS(cfg.validate(), Error);
    SamplerConfig many;
    many.min_objects = 3;
    many.max_objects = 2;
    CHECK_THROWS_AS(many.validate(), Error);
}

}  // TEST_SUITE
