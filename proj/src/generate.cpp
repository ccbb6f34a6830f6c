#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>
#include <omp.h>

#include "forge/dataset.hpp"
#include "forge/error.hpp"
#include "forge/visibility.hpp"

namespace forge {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

RunContext make_context(const RunConfig& config) {
    config.validate();
    RunContext ctx;
    ctx.config = config;
    if (config.catalog == "builtin") {
        ctx.catalog = builtin_catalog();
    } else {
        ctx.catalog = load_catalog(config.catalog);
    }
    ctx.split = split_categories(ctx.catalog.categories(), config.n_unseen, config.seed);
    return ctx;
}

std::string example_id(TaskKind task, const std::string& split, std::uint64_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%06llu", static_cast<unsigned long long>(index));
    return std::string(to_string(task)) + "_" + split + "_" + buf;
}

namespace {

Membership membership_for(const RunConfig& c, const std::string& split, std::uint64_t index) {
    switch (c.membership.at(split)) {
        case SplitMembership::Seen: return Membership::Seen;
        case SplitMembership::Unseen: return Membership::Unseen;
        case SplitMembership::Any: return Membership::Any;
        case SplitMembership::Mixed: return index % 2 == 0 ? Membership::Seen : Membership::Unseen;
    }
    return Membership::Any;
}

Rng example_stream(std::uint64_t seed, TaskKind task, const std::string& split, std::uint64_t index, int salt) {
    return Rng(hash_combine(seed, hash_string("example")))
        .derive({hash_string(to_string(task)), hash_string(split), index, static_cast<std::uint64_t>(salt)});
}

ExamplePlan plan_once(const RunContext& ctx, TaskKind task, const std::string& split, std::uint64_t index,
                      int salt) {
    const RunConfig& c = ctx.config;
    const Membership m = membership_for(c, split, index);
    Rng rng = example_stream(c.seed, task, split, index, salt);

    SamplerConfig sampler = c.sampler;
    if (task == TaskKind::Insert) {
        // Leave room for the inserted object.
        sampler.max_objects = std::min(sampler.max_objects, c.edit.max_objects - 1);
        sampler.min_objects = std::min(sampler.min_objects, sampler.max_objects);
    }
    Rng scene_rng = rng.derive("scene");
    Rng edit_rng = rng.derive("edit");
    SceneSpec source = sample_scene(ctx.catalog, ctx.split, m, sampler, scene_rng);
    SampledEdit sampled = sample_edit(source, task, ctx.catalog, ctx.split, m, c.edit, edit_rng);
    SceneSpec target = std::move(sampled.target);
    EditSpec edit = std::move(sampled.edit);
    const std::uint16_t edited = edit.target ? *edit.target : target.objects.back().instance_id;

    const VisibilityResult vis = ensure_visibility(source, target, edited, c.sampler);
    if (vis.steps > 0) {
        source.camera = vis.camera;
        target.camera = vis.camera;
        if (!reproject_edit(edit, source, vis.camera))
            throw VisibilityError("destination left the frame after the camera pull-back");
    }

    ExamplePlan plan;
    ExampleRecord& r = plan.record;
    r.id = example_id(task, split, index);
    r.split = split;
    r.membership = std::string(to_string(m));
    r.index = index;
    r.salt = salt;
    r.seed = rng.key();
    r.render_seed = hash_combine(rng.key(), hash_string("render"));
    r.edit = edit;
    r.edited_instance = edited;
    r.pullback_steps = vis.steps;
    r.source = to_record(source, ctx.split);
    r.target = to_record(target, ctx.split);
    const std::string dir = "images/" + r.id + "/";
    r.source_image = dir + "source.png";
    r.target_image = dir + "target.png";
    r.source_mask = dir + "source_mask.png";
    r.target_mask = dir + "target_mask.png";
    if (target.objects.empty()) r.flags.push_back("empty_after_removal");
    if (vis.steps > 0) r.flags.push_back("camera_pulled_back");
    plan.source = std::move(source);
    plan.target = std::move(target);
    return plan;
}

std::mutex& log_mutex() {
    static std::mutex m;
    return m;
}

void log_line(const json& j) {
    std::lock_guard<std::mutex> lock(log_mutex());
    std::fprintf(stderr, "%s\n", j.dump().c_str());
}

bool files_exist(const fs::path& root, const ExampleRecord& r) {
    for (const auto* p : {&r.source_image, &r.target_image, &r.source_mask, &r.target_mask})
        if (!fs::is_regular_file(root / *p)) return false;
    return true;
}

// Manifest lines appended during a run that was interrupted; a torn last
// line is ignored.
std::map<std::string, ExampleRecord> read_partial_manifest(const fs::path& path) {
    std::map<std::string, ExampleRecord> out;
    std::ifstream in(path, std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            ExampleRecord r = parse_record(line);
            out[r.id] = std::move(r);
        } catch (const SchemaError&) {
        }
    }
    return out;
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + p.string());
    out << text;
    if (!out) throw IoError("write failed for " + p.string());
}

void render_example(const ExamplePlan& plan, const Catalog& catalog, RenderSettings rs, const fs::path& root) {
    rs.threads = 1;
    fs::create_directories(root / fs::path(plan.record.source_image).parent_path());
    const RenderOutput src = render(plan.source, catalog, rs, plan.record.render_seed);
    const RenderOutput tgt = render(plan.target, catalog, rs, plan.record.render_seed);
    write_png(root / plan.record.source_image, src.rgb);
    write_png(root / plan.record.target_image, tgt.rgb);
    write_png(root / plan.record.source_mask, src.mask);
    write_png(root / plan.record.target_mask, tgt.mask);
}

}  // namespace

std::optional<ExamplePlan> plan_example(const RunContext& ctx, TaskKind task, const std::string& split,
                                        std::uint64_t index, std::string* why) {
    for (int salt = 0; salt <= ctx.config.max_salts; ++salt) {
        try {
            return plan_once(ctx, task, split, index, salt);
        } catch (const Error& e) {
            if (why) *why = e.what();
        }
    }
    return std::nullopt;
}

GenerateSummary generate(const RunConfig& config, const GenerateOptions& options) {
    const auto t0 = std::chrono::steady_clock::now();
    const RunContext ctx = make_context(config);
    const fs::path root = config.output_root;
    const fs::path manifest_path = root / "manifest.jsonl";
    const fs::path config_path = root / "config.txt";
    const std::string config_text = to_config_text(config);

    std::map<std::string, ExampleRecord> previous;
    if (fs::exists(manifest_path) || fs::exists(config_path)) {
        if (!options.resume)
            throw IoError(root.string() + " already holds a run; pass --resume to continue it");
        if (fs::exists(config_path) && read_text(config_path) != config_text)
            throw IoError("config differs from the run being resumed in " + root.string());
        previous = read_partial_manifest(manifest_path);
    }
    fs::create_directories(root);
    write_text(config_path, config_text);

    struct Job {
        TaskKind task;
        std::string split;
        std::uint64_t index;
    };
    std::vector<Job> jobs;
    for (const auto& split : config.splits)
        for (TaskKind task : config.tasks)
            for (int i = 0; i < config.count_for(split, task); ++i)
                jobs.push_back({task, split, static_cast<std::uint64_t>(i)});

    std::vector<std::optional<ExampleRecord>> done(jobs.size());
    std::vector<std::string> skipped(jobs.size());
    GenerateSummary summary;
    std::vector<std::size_t> todo;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        const std::string id = example_id(jobs[j].task, jobs[j].split, jobs[j].index);
        auto it = previous.find(id);
        if (it != previous.end() && files_exist(root, it->second)) {
            done[j] = it->second;
            ++summary.reused;
        } else {
            todo.push_back(j);
        }
    }

    // Records of reused examples are re-appended so the partial manifest
    // stays complete if this run is interrupted too.
    std::ofstream partial(manifest_path, std::ios::binary | std::ios::trunc);
    if (!partial) throw IoError("cannot write " + manifest_path.string());
    for (const auto& r : done)
        if (r) partial << serialize_record(*r) << '\n';
    partial.flush();

    const int workers = config.threads > 0 ? config.threads : omp_get_max_threads();
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
    for (std::size_t k = 0; k < todo.size(); ++k) {
        const std::size_t j = todo[k];
        const Job& job = jobs[j];
        const auto start = std::chrono::steady_clock::now();
        const std::string id = example_id(job.task, job.split, job.index);
        try {
            std::string why;
            auto plan = plan_example(ctx, job.task, job.split, job.index, &why);
            if (!plan) {
                skipped[j] = why;
                if (!options.quiet) log_line({{"event", "skipped"}, {"id", id}, {"reason", why}});
                continue;
            }
            render_example(*plan, ctx.catalog, config.render, root);
            const std::string line = serialize_record(plan->record);
            {
                std::lock_guard<std::mutex> lock(log_mutex());
                partial << line << '\n';
                partial.flush();
            }
            const double ms =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
            if (!options.quiet)
                log_line({{"event", "example"},
                          {"id", id},
                          {"salt", plan->record.salt},
                          {"objects", plan->source.objects.size()},
                          {"pullback_steps", plan->record.pullback_steps},
                          {"ms", std::round(ms * 10) / 10}});
            done[j] = std::move(plan->record);
        } catch (...) {
#pragma omp critical(forge_generate_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    partial.close();
    if (failure) std::rethrow_exception(failure);

    Manifest manifest;
    std::string skipped_text;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        if (done[j]) {
            manifest.records.push_back(*done[j]);
        } else {
            skipped_text += json{{"id", example_id(jobs[j].task, jobs[j].split, jobs[j].index)},
                                 {"reason", skipped[j]}}
                                .dump() +
                            "\n";
            ++summary.skipped;
        }
    }
    write_manifest(manifest_path, manifest);
    write_text(root / "skipped.jsonl", skipped_text);
    summary.generated = manifest.records.size() - summary.reused;
    summary.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!options.quiet)
        log_line({{"event", "done"},
                  {"generated", summary.generated},
                  {"reused", summary.reused},
                  {"skipped", summary.skipped},
                  {"seconds", std::round(summary.seconds * 100) / 100}});
    return summary;
}

std::size_t rerender(const fs::path& manifest_path, const RerenderOptions& options) {
    const fs::path run_root = manifest_path.parent_path().empty() ? fs::path(".") : manifest_path.parent_path();
    RunConfig config = load_run_config(run_root / "config.txt");
    if (options.resolution) config.render.resolution = *options.resolution;
    if (options.samples_per_pixel) config.render.samples_per_pixel = *options.samples_per_pixel;
    config.sampler.resolution = config.render.resolution;
    config.render.validate();
    const RunContext ctx = make_context(config);
    const Manifest manifest = read_manifest(manifest_path);
    const fs::path out_root = options.output_root.value_or(run_root);

    std::vector<ExamplePlan> plans(manifest.records.size());
    for (std::size_t i = 0; i < plans.size(); ++i) {
        const ExampleRecord& r = manifest.records[i];
        try {
            plans[i].record = r;
            plans[i].source = from_record(r.source, ctx.catalog);
            plans[i].target = from_record(r.target, ctx.catalog);
        } catch (const SchemaError& e) {
            throw SchemaError("record " + r.id + ": " + e.what());
        }
    }
    const int workers = config.threads > 0 ? config.threads : omp_get_max_threads();
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
    for (std::size_t i = 0; i < plans.size(); ++i) {
        try {
            render_example(plans[i], ctx.catalog, config.render, out_root);
        } catch (...) {
#pragma omp critical(forge_rerender_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return plans.size();
}

std::string angle_bucket(double angle_deg, const std::vector<double>& edges) {
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        const bool last = i + 2 == edges.size();
        if (angle_deg >= edges[i] && (angle_deg < edges[i + 1] || (last && angle_deg == edges[i + 1]))) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "[%g, %g%c", edges[i], edges[i + 1], last ? ']' : ')');
            return buf;
        }
    }
    return "other";
}

std::string catalog_stats_report(const Catalog& catalog) {
    const CatalogStats s = catalog_stats(catalog);
    json per = json::object();
    for (const auto& [k, v] : s.per_category) per[k] = v;
    json j{{"total_objects", s.total_objects},
           {"total_categories", s.total_categories},
           {"median_per_category", s.median_per_category},
           {"mean_per_category", s.mean_per_category},
           {"std_per_category", s.std_per_category},
           {"per_category", per}};
    return j.dump(2);
}

std::string manifest_stats_report(const Manifest& manifest, const std::vector<double>& angle_edges) {
    std::map<std::string, std::size_t> tasks, splits, membership, objects;
    json angles = json::object();
    std::map<std::string, std::size_t> angle_counts;
    for (std::size_t i = 0; i + 1 < angle_edges.size(); ++i)
        angle_counts[angle_bucket(0.5 * (angle_edges[i] + angle_edges[i + 1]), angle_edges)] = 0;
    for (const auto& r : manifest.records) {
        ++tasks[std::string(to_string(r.edit.task))];
        ++splits[r.split];
        ++membership[r.membership];
        ++objects[std::to_string(scene_object_count(r))];
        if (r.edit.task == TaskKind::Rotate) ++angle_counts[angle_bucket(r.edit.angle_deg, angle_edges)];
    }
    // Bucket labels in edge order rather than string order.
    for (std::size_t i = 0; i + 1 < angle_edges.size(); ++i) {
        const std::string label = angle_bucket(0.5 * (angle_edges[i] + angle_edges[i + 1]), angle_edges);
        angles[label] = angle_counts[label];
    }
    if (angle_counts.count("other")) angles["other"] = angle_counts["other"];
    auto to_json = [](const std::map<std::string, std::size_t>& m) {
        json j = json::object();
        for (const auto& [k, v] : m) j[k] = v;
        return j;
    };
    json j{{"examples", manifest.records.size()},
           {"tasks", to_json(tasks)},
           {"splits", to_json(splits)},
           {"membership", to_json(membership)},
           {"object_count", to_json(objects)},
           {"rotation_angle", angles}};
    return j.dump(2);
}

}  // namespace forge
