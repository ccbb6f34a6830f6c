#include <doctest.h>

#include <nlohmann/json.hpp>

#include "forge/dataset.hpp"
#include "forge/error.hpp"
#include "support.hpp"

using namespace forge;
using forge::test::TempDir;
namespace fs = std::filesystem;

namespace {

RunConfig tiny_config(const fs::path& out, std::vector<TaskKind> tasks = {TaskKind::Rotate}, int count = 4) {
    RunConfig c;
    c.output_root = out;
    c.tasks = std::move(tasks);
    c.split_counts["train"] = count;
    c.render.resolution = {48, 48};
    c.sampler.resolution = c.render.resolution;
    c.render.samples_per_pixel = 2;
    c.seed = 17;
    return c;
}

std::size_t count_files(const fs::path& root, const std::string& name) {
    std::size_t n = 0;
    for (const auto& e : fs::recursive_directory_iterator(root)) n += e.path().filename() == name;
    return n;
}

ExampleRecord rotate_record(const std::string& id, double angle) {
    ExampleRecord r;
    r.id = id;
    r.split = "train";
    r.membership = "seen";
    r.edit.task = TaskKind::Rotate;
    r.edit.target = 2;
    r.edit.angle_deg = angle;
    ObjectRecord o;
    r.source.objects.push_back(o);
    return r;
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("run config parsing") {
    const RunConfig c = parse_run_config(
        "# demo\n"
        "output = runs/a   # trailing comment\n"
        "seed = 9\n"
        "tasks = rotate, remove\n"
        "splits = train,val\n"
        "count = 5\n"
        "count.val = 2\n"
        "count.remove = 3\n"
        "membership.val = unseen\n"
        "render.width = 64\n"
        "render.height = 32\n"
        "sampler.elevation_min = 45\n"
        "edit.angle_min = 30\n"
        "angle_edges = 0, 90, 180, 360\n",
        "/base");
    CHECK(c.output_root == fs::path("/base/runs/a"));
    CHECK(c.seed == 9);
    CHECK(c.tasks == std::vector<TaskKind>{TaskKind::Rotate, TaskKind::Remove});
    CHECK(c.count_for("train", TaskKind::Rotate) == 5);
    CHECK(c.count_for("val", TaskKind::Rotate) == 2);
    CHECK(c.count_for("val", TaskKind::Remove) == 3);
    CHECK(c.membership.at("val") == SplitMembership::Unseen);
    CHECK(c.render.resolution == Resolution{64, 32});
    CHECK(c.sampler.resolution == Resolution{64, 32});
    CHECK(c.sampler.elevation_min_deg == 45);
    CHECK(c.edit.angle_min_deg == 30);
    CHECK(c.angle_edges == std::vector<double>{0, 90, 180, 360});
}

TEST_CASE("run config errors name the line") {
    auto message = [](const std::string& text) {
        try {
            parse_run_config(text, ".");
        } catch (const Error& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    CHECK(message("seed = 1\nbogus = 2\n").find("line 2") != std::string::npos);
    CHECK(message("seed = 1\nseed = 2\n").find("line 2") != std::string::npos);
    CHECK(message("render.spp = many\n").find("line 1") != std::string::npos);
    CHECK(message("tasks = rotate, juggle\n").find("line 1") != std::string::npos);
    CHECK(message("just words\n").find("line 1") != std::string::npos);
    CHECK(message("edit.angle_min = 0\n") != "no error");
    CHECK(message("angle_edges = 0, 90, 45\n") != "no error");
}

TEST_CASE("run config text round-trips") {
    RunConfig c = tiny_config("/tmp/x", {TaskKind::Insert, TaskKind::Translate}, 7);
    c.splits = {"train", "test"};
    c.sampler.light_cone_deg = 12.345678901234567;
    c.render.background = {0.1, 0.2, 0.3};
    c.angle_edges = {0, 30, 360};
    c.task_counts[TaskKind::Insert] = 2;
    const std::string text = to_config_text(c);
    const RunConfig back = parse_run_config(text, "/tmp/x");
    CHECK(to_config_text(back) == text);
    CHECK(back.sampler.light_cone_deg == c.sampler.light_cone_deg);
    CHECK(back.count_for("test", TaskKind::Insert) == 2);
    CHECK(back.output_root == fs::path("/tmp/x/."));
}

TEST_CASE("records round-trip byte for byte") {
    TempDir dir;
    RunConfig cfg = tiny_config(dir.path());
    const RunContext ctx = make_context(cfg);
    for (auto task : {TaskKind::Translate, TaskKind::Rotate, TaskKind::Insert, TaskKind::Remove}) {
        for (std::uint64_t i = 0; i < 3; ++i) {
            const auto plan = plan_example(ctx, task, "train", i);
            REQUIRE(plan);
            const std::string line = serialize_record(plan->record);
            const ExampleRecord back = parse_record(line);
            CHECK(back == plan->record);
            CHECK(serialize_record(back) == line);
            CHECK(line.find('\n') == std::string::npos);
            // Scenes rebuild from records.
            CHECK(from_record(back.source, ctx.catalog) == plan->source);
            CHECK(from_record(back.target, ctx.catalog) == plan->target);
        }
    }
}

TEST_CASE("bad records are schema errors naming the record") {
    TempDir dir;
    const RunContext ctx = make_context(tiny_config(dir.path()));
    const auto plan = plan_example(ctx, TaskKind::Rotate, "train", 0);
    REQUIRE(plan);
    auto j = nlohmann::ordered_json::parse(serialize_record(plan->record));
    j["edit"]["payload"].erase("angle");
    try {
        parse_record(j.dump());
        FAIL("expected a schema error");
    } catch (const SchemaError& e) {
        CHECK(std::string(e.what()).find(plan->record.id) != std::string::npos);
    }
    j = nlohmann::ordered_json::parse(serialize_record(plan->record));
    j["schema_version"] = 99;
    CHECK_THROWS_AS(parse_record(j.dump()), SchemaError);
    CHECK_THROWS_AS(parse_record("{\"id\": 3"), SchemaError);
    SceneRecord unknown = plan->record.source;
    unknown.objects.at(0).asset_id = "not_an_asset";
    CHECK_THROWS_AS(from_record(unknown, ctx.catalog), SchemaError);
}

TEST_CASE("generation: file accounting, stats, rerender, corruption") {
    TempDir dir;
    RunConfig cfg = tiny_config(dir / "run", {TaskKind::Rotate}, 8);
    const GenerateSummary s = generate(cfg, {false, true});
    CHECK(s.generated == 8);
    CHECK(s.skipped == 0);
    const fs::path root = dir / "run";
    const Manifest m = read_manifest(root / "manifest.jsonl");
    REQUIRE(m.records.size() == 8);
    CHECK(count_files(root / "images", "source.png") + count_files(root / "images", "target.png") == 16);
    CHECK(count_files(root / "images", "source_mask.png") + count_files(root / "images", "target_mask.png") == 16);
    CHECK(fs::exists(root / "config.txt"));
    CHECK(fs::exists(root / "skipped.jsonl"));

    // Every referenced file exists and every image file is referenced.
    std::set<std::string> referenced;
    for (const auto& r : m.records)
        for (const auto& f : {r.source_image, r.target_image, r.source_mask, r.target_mask}) {
            CHECK(fs::exists(root / f));
            referenced.insert(fs::path(f).lexically_normal().string());
        }
    for (const auto& e : fs::recursive_directory_iterator(root / "images"))
        if (e.is_regular_file()) CHECK(referenced.count(fs::relative(e.path(), root).string()) == 1);

    const auto stats = nlohmann::json::parse(manifest_stats_report(m, cfg.angle_edges));
    CHECK(stats["examples"] == 8);
    CHECK(stats["tasks"] == nlohmann::json{{"rotate", 8}});
    std::size_t binned = 0;
    for (const auto& [k, v] : stats["rotation_angle"].items()) binned += v.get<std::size_t>();
    CHECK(binned == 8);

    // Masks agree with the stored scene, images with a fresh render.
    const RunConfig stored = load_run_config(root / "config.txt");
    for (const auto& r : m.records) {
        const SceneSpec src = from_record(r.source, builtin_catalog());
        const RenderOutput out = render(src, builtin_catalog(), stored.render, r.render_seed);
        CHECK(read_png_rgb(root / r.source_image) == out.rgb);
        CHECK(read_png_mask(root / r.source_mask) == out.mask);
        CHECK(r.edited_instance == *r.edit.target);
        CHECK(r.edit.angle_deg >= 15);
        CHECK(r.edit.angle_deg <= 345);
    }

    const auto before = test::tree_bytes(root);
    CHECK(rerender(root / "manifest.jsonl") == 8);
    CHECK(test::tree_bytes(root) == before);

    RerenderOptions opt;
    opt.output_root = dir / "small";
    opt.resolution = Resolution{128, 128};
    CHECK(rerender(root / "manifest.jsonl", opt) == 8);
    for (const auto& r : m.records) {
        const Image img = read_png_rgb(dir / "small" / r.target_image);
        CHECK(img.width == 128);
        CHECK(img.height == 128);
        const SegmentationMask a = read_png_mask(dir / "small" / r.source_mask);
        CHECK(a.width == 128);
        std::set<std::uint16_t> big, little;
        for (auto l : read_png_mask(root / r.source_mask).labels) big.insert(l);
        for (auto l : a.labels) little.insert(l);
        CHECK(little.count(r.edited_instance) == 1);
        CHECK(std::includes(little.begin(), little.end(), big.begin(), big.end()));
    }

    // Corrupt one record: rerender reports it by id.
    std::string text = test::read_file(root / "manifest.jsonl");
    const std::string victim = m.records[3].id;
    const auto at = text.find("\"id\":\"" + victim + "\"");
    REQUIRE(at != std::string::npos);
    const auto edit_at = text.find("\"angle\":", at);
    text.replace(edit_at, 8, "\"angel\":");
    test::write_file(dir / "bad" / "manifest.jsonl", text);
    fs::copy_file(root / "config.txt", dir / "bad" / "config.txt");
    try {
        rerender(dir / "bad" / "manifest.jsonl");
        FAIL("expected a schema error");
    } catch (const SchemaError& e) {
        CHECK(std::string(e.what()).find(victim) != std::string::npos);
        CHECK(std::string(e.what()).find("manifest.jsonl:4") != std::string::npos);
    }

    // A finished run is not silently overwritten.
    CHECK_THROWS_AS(generate(cfg, {false, true}), Error);
}

TEST_CASE("generation: resume and worker count leave the bytes alone") {
    TempDir dir;
    RunConfig cfg = tiny_config(dir / "a", {TaskKind::Translate, TaskKind::Insert, TaskKind::Remove}, 3);
    cfg.threads = 1;
    generate(cfg, {false, true});
    const auto reference = test::tree_bytes(dir / "a");

    RunConfig parallel = cfg;
    parallel.output_root = dir / "b";
    parallel.threads = 3;
    generate(parallel, {false, true});
    CHECK(test::tree_bytes(dir / "b") == reference);

    // Interrupted run: half the examples gone, manifest truncated mid-line.
    const Manifest m = read_manifest(dir / "b" / "manifest.jsonl");
    for (std::size_t i = 0; i < m.records.size(); i += 2) fs::remove_all(dir / "b" / "images" / m.records[i].id);
    std::string text = test::read_file(dir / "b" / "manifest.jsonl");
    test::write_file(dir / "b" / "manifest.jsonl", text.substr(0, text.size() / 2));
    const GenerateSummary s = generate(parallel, {true, true});
    CHECK(s.generated + s.reused == m.records.size());
    CHECK(s.generated >= (m.records.size() + 1) / 2);
    CHECK(test::tree_bytes(dir / "b") == reference);

    // Resuming a tree produced with another config is refused.
    RunConfig other = parallel;
    other.seed = 18;
    CHECK_THROWS_AS(generate(other, {true, true}), Error);
}

TEST_CASE("generation: membership and split discipline") {
    TempDir dir;
    RunConfig cfg = tiny_config(dir / "run", {TaskKind::Insert, TaskKind::Rotate}, 4);
    cfg.splits = {"train", "val"};
    cfg.split_counts["val"] = 4;
    generate(cfg, {false, true});
    const RunContext ctx = make_context(cfg);
    const Manifest m = read_manifest(dir / "run" / "manifest.jsonl");
    CHECK(m.records.size() == 16);
    for (const auto& r : m.records) {
        CAPTURE(r.id);
        const bool want_seen = r.split == "train" || r.index % 2 == 0;
        CHECK(r.membership == (want_seen ? "seen" : "unseen"));
        for (const auto* scene : {&r.source, &r.target})
            for (const auto& o : scene->objects) {
                CHECK(o.seen == ctx.split.is_seen(o.category));
                CHECK(o.seen == want_seen);
            }
        if (r.edit.task == TaskKind::Insert) {
            CHECK(ctx.split.is_seen(r.edit.category) == want_seen);
            CHECK(r.target.objects.size() == r.source.objects.size() + 1);
            CHECK(r.target.objects.size() <= 4);
            CHECK(scene_object_count(r) == r.target.objects.size());
        }
    }
    CHECK(make_context(cfg).split == ctx.split);
}

TEST_CASE("angle histogram honours the configured edges") {
    Manifest m;
    m.records.push_back(rotate_record("r0", 30));
    m.records.push_back(rotate_record("r1", 120));
    const auto a = nlohmann::json::parse(manifest_stats_report(m, {0, 45, 90, 135, 180, 225, 270, 315, 360}));
    CHECK(a["rotation_angle"]["[0, 45)"] == 1);
    CHECK(a["rotation_angle"]["[90, 135)"] == 1);
    CHECK(a["rotation_angle"]["[45, 90)"] == 0);
    CHECK(a["rotation_angle"].size() == 8);
    const auto b = nlohmann::json::parse(manifest_stats_report(m, {0, 100, 360}));
    CHECK(b["rotation_angle"]["[0, 100)"] == 1);
    CHECK(b["rotation_angle"]["[100, 360]"] == 1);
    CHECK(b["object_count"]["1"] == 2);
    CHECK(angle_bucket(360, {0, 180, 360}) == "[180, 360]");
    CHECK(angle_bucket(180, {0, 180, 360}) == "[180, 360]");
    CHECK(angle_bucket(12.5, {0, 12.5, 360}) == "[12.5, 360]");
}

TEST_CASE("catalog stats report") {
    const auto j = nlohmann::json::parse(catalog_stats_report(builtin_catalog()));
    const CatalogStats s = catalog_stats(builtin_catalog());
    CHECK(j["total_objects"] == s.total_objects);
    CHECK(j["total_categories"] == s.total_categories);
    CHECK(j["median_per_category"].get<double>() == s.median_per_category);
    CHECK(j["mean_per_category"].get<double>() == s.mean_per_category);
    CHECK(j["std_per_category"].get<double>() == s.std_per_category);
}

TEST_CASE("example ids") {
    CHECK(example_id(TaskKind::Rotate, "train", 7) == "rotate_train_000007");
    CHECK(example_id(TaskKind::Insert, "test", 123456) == "insert_test_123456");
}

}  // TEST_SUITE
