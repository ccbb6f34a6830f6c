#include <doctest.h>

#include <cmath>

#include "forge/catalog.hpp"
#include "forge/error.hpp"
#include "support.hpp"

using namespace forge;
using forge::test::TempDir;

namespace {

CatalogError::Kind parse_kind(const std::string& jsonl, const std::filesystem::path& base = ".") {
    try {
        parse_catalog(jsonl, base);
    } catch (const CatalogError& e) {
        return e.kind();
    }
    FAIL("no CatalogError");
    return CatalogError::Kind::Empty;
}

Catalog sized_catalog(std::initializer_list<int> sizes) {
    std::vector<AssetRecord> assets;
    int c = 0;
    for (int n : sizes) {
        for (int i = 0; i < n; ++i)
            assets.push_back(test::box_asset("a" + std::to_string(c) + "_" + std::to_string(i), "cat" + std::to_string(c)));
        ++c;
    }
    return Catalog(std::move(assets), {}, {});
}

}  // namespace

TEST_SUITE("catalog") {

TEST_CASE("manifest with three primitives") {
    const std::string jsonl =
        R"({"id": "b1", "category": "box", "source": {"kind": "box"}})"
        "\n"
        R"({"id": "s1", "category": "ball", "description": "a red ball", "source": {"kind": "sphere", "params": {"radius": 0.4}}})"
        "\n\n"
        R"({"id": "c1", "category": "can", "source": {"kind": "cylinder", "params": {"segments": 12}}, "scale_hint": 0.5})"
        "\n";
    const Catalog c = parse_catalog(jsonl, ".");
    CHECK(c.assets().size() == 3);
    CHECK(c.categories() == std::vector<std::string>{"ball", "box", "can"});
    CHECK(c.find("s1")->description == "a red ball");
    CHECK(c.find("b1")->description == "a box");
    CHECK(c.find("c1")->scale_hint == 0.5);
    CHECK(c.find("nope") == nullptr);
    CHECK_FALSE(c.floors().empty());
    CHECK_FALSE(c.env_lights().empty());
}

TEST_CASE("missing mesh file names the asset") {
    TempDir dir;
    const std::string jsonl = R"({"id": "ghost_07", "category": "x", "source": {"kind": "mesh", "path": "nowhere.obj"}})";
    test::write_file(dir / "catalog.jsonl", jsonl);
    try {
        load_catalog(dir / "catalog.jsonl");
        FAIL("expected an error");
    } catch (const CatalogError& e) {
        CHECK(e.kind() == CatalogError::Kind::MissingFile);
        CHECK(std::string(e.what()).find("ghost_07") != std::string::npos);
    }
    CHECK_THROWS_AS(load_catalog(dir / "absent.jsonl"), CatalogError);
}

TEST_CASE("mesh assets load relative to the manifest") {
    TempDir dir;
    test::write_file(dir / "meshes/tet.obj",
                     "# tetrahedron\nv 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\n"
                     "f 1 3 2\nf 1 2 4\nf 1 4 3\nf 2 3 4\n");
    test::write_file(dir / "catalog.jsonl",
                     R"({"id": "tet", "category": "shard", "source": {"kind": "mesh", "path": "meshes/tet.obj"}})");
    const Catalog c = load_catalog(dir / "catalog.jsonl");
    const auto& a = *c.find("tet");
    CHECK(a.canonical_mesh.triangles.size() == 4);
    CHECK(signed_volume(a.canonical_mesh) == doctest::Approx(1.0 / 6));
    CHECK_FALSE(check_resting(a.canonical_mesh, *a.resting_pose));
}

TEST_CASE("catalog parse errors carry a kind") {
    CHECK(parse_kind("{not json}") == CatalogError::Kind::Parse);
    CHECK(parse_kind(R"({"id": "a", "category": "c", "source": {"kind": "teapot"}})") == CatalogError::Kind::Parse);
    CHECK(parse_kind(R"({"category": "c", "source": {"kind": "box"}})") == CatalogError::Kind::Parse);
    CHECK(parse_kind(R"({"id": "a", "category": "c", "source": {"kind": "box", "params": {"sx": -1}}})") ==
          CatalogError::Kind::InvalidParams);
    CHECK(parse_kind(R"({"id": "a", "category": "c", "source": {"kind": "box", "params": {"radius": 1}}})") ==
          CatalogError::Kind::InvalidParams);
    CHECK(parse_kind(R"({"id": "a", "category": "c", "source": {"kind": "box"}})"
                     "\n"
                     R"({"id": "a", "category": "d", "source": {"kind": "box"}})") ==
          CatalogError::Kind::DuplicateId);
    CHECK(parse_kind("") == CatalogError::Kind::Empty);
    try {
        parse_catalog("\n{oops", ".");
    } catch (const CatalogError& e) {
        CHECK(std::string(e.what()).find("catalog line 2") != std::string::npos);
    }
}

TEST_CASE("ascii mesh grammar") {
    const TriMesh m = parse_ascii_mesh(
        "o quad\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvt 0 0\nvt 1 0\nvt 1 1\nvt 0 1\nvn 0 0 1\n"
        "s off\nf 1/1/1 2/2/1 3/3/1 4/4/1\n");
    CHECK(m.vertices.size() == 4);
    CHECK(m.triangles.size() == 2);
    CHECK(m.uv[2] == Vec2{1, 1});
    CHECK(m.normals[0] == Vec3{0, 0, 1});
    const TriMesh rel = parse_ascii_mesh("v 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nf -3//1 -2 -1\n");
    CHECK(rel.triangles.size() == 1);
    // References only reach elements already defined.
    CHECK_THROWS_AS(parse_ascii_mesh("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3//1 -2 -1\nvn 0 0 1\n"), CatalogError);
    CHECK_THROWS_AS(parse_ascii_mesh("v 0 0 0\nf 1 2 3\n"), CatalogError);
    CHECK_THROWS_AS(parse_ascii_mesh("v 0 0 zero\n"), CatalogError);
}

TEST_CASE("primitive generators") {
    const TriMesh box = generate_primitive(PrimitiveKind::Box, {});
    CHECK(box.vertices.size() == 8);
    CHECK(box.triangles.size() == 12);
    CHECK(signed_volume(box) == doctest::Approx(1).epsilon(1e-12));

    const double r = 0.5;
    const TriMesh s = generate_primitive(PrimitiveKind::Sphere, {{"radius", r}, {"subdivisions", 3}});
    const double sphere = 4.0 / 3.0 * kPi * r * r * r;
    CHECK(std::abs(signed_volume(s) - sphere) / sphere < 0.02);

    const TriMesh cyl = generate_primitive(PrimitiveKind::Cylinder, {{"radius", 1}, {"height", 2}, {"segments", 256}});
    CHECK(signed_volume(cyl) == doctest::Approx(2 * kPi).epsilon(1e-3));

    const TriMesh torus = generate_primitive(PrimitiveKind::Torus, {{"major", 1}, {"minor", 0.25}, {"segments", 128}, {"rings", 64}});
    CHECK(signed_volume(torus) == doctest::Approx(2 * kPi * kPi * 1 * 0.0625).epsilon(5e-3));

    for (auto kind : {PrimitiveKind::Box, PrimitiveKind::Sphere, PrimitiveKind::Cylinder, PrimitiveKind::Cone,
                      PrimitiveKind::Torus, PrimitiveKind::LBlock, PrimitiveKind::Table}) {
        const TriMesh m = generate_primitive(kind, {});
        CAPTURE(to_string(kind));
        CHECK_NOTHROW(validate_mesh(m));
        CHECK(signed_volume(m) > 0);
        CHECK(m.uv.size() == m.vertices.size());
        CHECK(m.normals.size() == m.vertices.size());
        // Centered on the bounding box.
        const Aabb b = bounds(m.vertices);
        CHECK(length(b.center()) < 1e-9);
        CHECK(primitive_kind_from_string(to_string(kind)) == kind);
    }
}

TEST_CASE("primitives are deterministic in kind, params and seed") {
    const PrimitiveParams p{{"radius", 0.5}, {"jitter", 0.2}};
    const TriMesh a = generate_primitive(PrimitiveKind::Sphere, p, 17);
    const TriMesh b = generate_primitive(PrimitiveKind::Sphere, p, 17);
    const TriMesh c = generate_primitive(PrimitiveKind::Sphere, p, 18);
    CHECK(a == b);
    CHECK_FALSE(a == c);
}

TEST_CASE("category split") {
    std::vector<std::string> cats;
    for (int i = 0; i < 1613; ++i) cats.push_back("category_" + std::to_string(i));
    const CategorySplit s = split_categories(cats, 100, 1);
    CHECK(s.seen.size() == 1513);
    CHECK(s.unseen.size() == 100);
    for (const auto& u : s.unseen) CHECK(s.seen.count(u) == 0);
    CHECK(split_categories(cats, 100, 1) == s);
    CHECK_FALSE(split_categories(cats, 100, 2) == s);
    // Input order and duplicates do not matter.
    std::vector<std::string> shuffled(cats.rbegin(), cats.rend());
    shuffled.push_back(cats[5]);
    CHECK(split_categories(shuffled, 100, 1) == s);

    const CategorySplit none = split_categories({"a", "b", "c"}, 0, 9);
    CHECK(none.seen.size() == 3);
    CHECK(none.unseen.empty());
    CHECK_THROWS_AS(split_categories({"a", "b"}, 2, 0), CatalogError);
}

TEST_CASE("asset sampling") {
    std::vector<AssetRecord> assets;
    assets.push_back(test::box_asset("solo", "lamp"));
    for (int i = 0; i < 3; ++i) assets.push_back(test::box_asset("mug_" + std::to_string(i), "mug"));
    for (int i = 0; i < 3; ++i) assets.push_back(test::box_asset("vase_" + std::to_string(i), "vase"));
    const Catalog c(std::move(assets), {}, {});
    const CategorySplit split{{"lamp", "mug", "vase"}, {}};
    Rng rng(3);
    CHECK(sample_asset(c, split, Membership::Any, std::string("lamp"), rng)->id == "solo");
    try {
        sample_asset(c, split, Membership::Unseen, std::string("mug"), rng);
        FAIL("expected no match");
    } catch (const CatalogError& e) {
        CHECK(e.kind() == CatalogError::Kind::NoMatch);
    }

    const CategorySplit two{{"mug"}, {"vase", "lamp"}};
    int mugs = 0;
    const int n = 10000;
    const Catalog pair = sized_catalog({3, 3});
    const CategorySplit halves{{"cat0", "cat1"}, {}};
    for (int i = 0; i < n; ++i) mugs += sample_asset(pair, halves, Membership::Seen, std::nullopt, rng)->category == "cat0";
    CHECK(std::abs(mugs - n / 2) <= 3 * std::sqrt(n * 0.25));
    for (int i = 0; i < 200; ++i) CHECK(sample_asset(c, two, Membership::Unseen, std::nullopt, rng)->category != "mug");
}

TEST_CASE("catalog statistics") {
    const CatalogStats s = catalog_stats(sized_catalog({1, 2, 3}));
    CHECK(s.total_objects == 6);
    CHECK(s.total_categories == 3);
    CHECK(s.median_per_category == 2);
    CHECK(s.mean_per_category == 2);
    CHECK(s.std_per_category == doctest::Approx(std::sqrt(2.0 / 3)));
    CHECK(catalog_stats(sized_catalog({5})).std_per_category == 0);
    CHECK(catalog_stats(sized_catalog({1, 4})).median_per_category == 2.5);
}

TEST_CASE("shipped catalog statistics") {
    // Counted independently from assets/default_catalog.jsonl.
    const CatalogStats s = catalog_stats(builtin_catalog());
    CHECK(s.total_objects == 38);
    CHECK(s.total_categories == 12);
    CHECK(s.median_per_category == 3.0);
    CHECK(s.mean_per_category == doctest::Approx(3.1666666666666665).epsilon(1e-15));
    CHECK(s.std_per_category == doctest::Approx(0.5527707983925667).epsilon(1e-12));
    const std::map<std::string, std::size_t> want{{"ball", 4},  {"block", 3},  {"book", 3},          {"bracket", 3},
                                                  {"can", 4},   {"crate", 4},  {"donut", 3},         {"pillar", 3},
                                                  {"ring", 2},  {"rock", 3},   {"table", 3},         {"traffic cone", 3}};
    CHECK(s.per_category == want);
}

TEST_CASE("floors and env lights") {
    const Catalog& c = builtin_catalog();
    for (const auto& f : c.floors()) {
        CHECK(f.image.width > 0);
        CHECK(f.tiling > 0);
        CHECK(c.find_floor(f.id) == &f);
    }
    for (const auto& e : c.env_lights()) {
        const Vec3 a = e.ambient_term();
        CHECK(a.x >= 0);
        CHECK(a.x <= 1);
    }
    CHECK(c.find_floor("no-such-floor") == nullptr);
}

}  // TEST_SUITE
