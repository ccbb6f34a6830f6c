#include "forge/eval.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>
#include <omp.h>

#include "forge/error.hpp"

namespace forge {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

void add(BucketStats& b, const CandidateScore& s) {
    ++b.count;
    b.mean_psnr += s.psnr;
    b.mean_ssim += s.ssim;
}

void finish(BucketStats& b) {
    if (b.count == 0) return;
    b.mean_psnr /= static_cast<double>(b.count);
    b.mean_ssim /= static_cast<double>(b.count);
}

BucketStats& bucket(Buckets& buckets, const std::string& key) {
    for (auto& [k, v] : buckets)
        if (k == key) return v;
    buckets.emplace_back(key, BucketStats{});
    return buckets.back().second;
}

json bucket_json(const Buckets& buckets) {
    json j = json::object();
    for (const auto& [k, b] : buckets)
        j[k] = json{{"count", b.count},
                    {"psnr", b.count ? json(b.mean_psnr) : json(nullptr)},
                    {"ssim", b.count ? json(b.mean_ssim) : json(nullptr)}};
    return j;
}

}  // namespace

EvalReport summarize(std::vector<ExampleScore> examples, const EvalConfig& config) {
    EvalReport r;
    r.selector = config.selector;
    r.k = config.k;
    for (TaskKind t : {TaskKind::Translate, TaskKind::Rotate, TaskKind::Insert, TaskKind::Remove})
        bucket(r.by_task, std::string(to_string(t)));
    bucket(r.by_membership, "seen");
    bucket(r.by_membership, "unseen");
    for (int n = 1; n <= 4; ++n) bucket(r.by_object_count, std::to_string(n));
    for (std::size_t i = 0; i + 1 < config.angle_edges.size(); ++i)
        bucket(r.by_angle, angle_bucket(0.5 * (config.angle_edges[i] + config.angle_edges[i + 1]), config.angle_edges));

    for (const auto& e : examples) {
        const CandidateScore& s = e.best();
        add(r.overall, s);
        add(bucket(r.by_task, std::string(to_string(e.task))), s);
        add(bucket(r.by_membership, e.membership), s);
        add(bucket(r.by_object_count, std::to_string(e.object_count)), s);
        add(bucket(r.by_angle, e.angle_deg ? angle_bucket(*e.angle_deg, config.angle_edges) : "n/a"), s);
    }
    bucket(r.by_angle, "n/a");
    finish(r.overall);
    for (Buckets* bs : {&r.by_task, &r.by_membership, &r.by_object_count, &r.by_angle})
        for (auto& [k, b] : *bs) finish(b);
    r.examples = std::move(examples);
    return r;
}

EvalReport evaluate_set(const Manifest& manifest, const fs::path& run_root, const fs::path& pred_dir,
                        const EvalConfig& config) {
    if (config.k < 1) throw MetricError("evaluate_set: k must be >= 1");

    // Candidate discovery first so every missing prediction is reported.
    std::vector<std::vector<std::string>> found(manifest.records.size());
    std::vector<std::string> missing;
    for (std::size_t i = 0; i < manifest.records.size(); ++i) {
        const auto& r = manifest.records[i];
        for (int c = 0; c < config.k; ++c) {
            const std::string name = "cand_" + std::to_string(c) + ".png";
            if (fs::is_regular_file(pred_dir / r.id / name)) found[i].push_back(name);
        }
        if (found[i].empty()) missing.push_back((pred_dir / r.id).string() + "/cand_{0.." +
                                                std::to_string(config.k - 1) + "}.png");
    }
    if (!missing.empty()) {
        std::ostringstream msg;
        msg << missing.size() << " example(s) have no candidate predictions:";
        for (const auto& m : missing) msg << "\n  " << m;
        throw MetricError(msg.str());
    }

    std::vector<ExampleScore> scores(manifest.records.size());
    std::exception_ptr failure;
    const int workers = config.threads > 0 ? config.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
    for (std::size_t i = 0; i < manifest.records.size(); ++i) {
        try {
            const auto& r = manifest.records[i];
            const Image gt = read_png_rgb(run_root / r.target_image);
            const SegmentationMask sm = read_png_mask(run_root / r.source_mask);
            const SegmentationMask tm = read_png_mask(run_root / r.target_mask);
            RoiRect roi = roi_from_masks(sm, tm, r.edited_instance, config.padding_px);
            roi = grow_to_min(roi, kSsimWindow, gt.width, gt.height);

            std::vector<Image> cands;
            for (const auto& name : found[i]) {
                cands.push_back(read_png_rgb(pred_dir / r.id / name));
                if (cands.back().width != gt.width || cands.back().height != gt.height)
                    throw MetricError("prediction " + (pred_dir / r.id / name).string() + " is " +
                                      std::to_string(cands.back().width) + "x" +
                                      std::to_string(cands.back().height) + ", ground truth is " +
                                      std::to_string(gt.width) + "x" + std::to_string(gt.height));
            }
            const BestOfK best = best_of_k(cands, gt, roi, config.selector);

            ExampleScore& e = scores[i];
            e.id = r.id;
            e.task = r.edit.task;
            e.membership = r.membership;
            e.object_count = scene_object_count(r);
            if (r.edit.task == TaskKind::Rotate) e.angle_deg = r.edit.angle_deg;
            e.roi = roi;
            e.candidates = found[i];
            e.scores = best.scores;
            e.selected = best.index;
        } catch (...) {
#pragma omp critical(forge_eval_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return summarize(std::move(scores), config);
}

std::string EvalReport::to_json() const {
    json ex = json::array();
    for (const auto& e : examples) {
        json cands = json::array();
        for (std::size_t i = 0; i < e.scores.size(); ++i)
            cands.push_back(json{{"file", e.candidates.size() > i ? e.candidates[i] : ""},
                                 {"psnr", e.scores[i].psnr},
                                 {"ssim", e.scores[i].ssim}});
        ex.push_back(json{{"id", e.id},
                          {"task", std::string(to_string(e.task))},
                          {"membership", e.membership},
                          {"object_count", e.object_count},
                          {"angle", e.angle_deg ? json(*e.angle_deg) : json(nullptr)},
                          {"roi", json::array({e.roi.x0, e.roi.y0, e.roi.x1, e.roi.y1})},
                          {"candidates", cands},
                          {"selected", e.selected},
                          {"psnr", e.best().psnr},
                          {"ssim", e.best().ssim}});
    }
    json j{{"selector", std::string(to_string(selector))},
           {"k", k},
           {"examples_evaluated", overall.count},
           {"mean",
            {{"psnr", overall.count ? json(overall.mean_psnr) : json(nullptr)},
             {"ssim", overall.count ? json(overall.mean_ssim) : json(nullptr)},
             {"lpips", nullptr},
             {"fid", nullptr}}},
           {"by_task", bucket_json(by_task)},
           {"by_membership", bucket_json(by_membership)},
           {"by_object_count", bucket_json(by_object_count)},
           {"by_angle", bucket_json(by_angle)},
           {"examples", ex}};
    return j.dump(2) + "\n";
}

std::string EvalReport::to_table() const {
    std::ostringstream out;
    char line[160];
    auto table = [&](const char* title, const Buckets& bs) {
        std::snprintf(line, sizeof line, "%-20s %8s %10s %8s\n", title, "count", "psnr", "ssim");
        out << line;
        for (const auto& [key, b] : bs) {
            if (b.count)
                std::snprintf(line, sizeof line, "%-20s %8zu %10.4f %8.4f\n", key.c_str(), b.count, b.mean_psnr,
                              b.mean_ssim);
            else
                std::snprintf(line, sizeof line, "%-20s %8zu %10s %8s\n", key.c_str(), b.count, "-", "-");
            out << line;
        }
        out << "\n";
    };
    out << "selector: " << to_string(selector) << ", k = " << k << "\n";
    table("overall", Buckets{{"all", overall}});
    table("task", by_task);
    table("membership", by_membership);
    table("objects in scene", by_object_count);
    table("rotation angle", by_angle);
    return out.str();
}

void write_baseline(const Manifest& manifest, const fs::path& run_root, const fs::path& pred_dir,
                    BaselineKind kind) {
    for (const auto& r : manifest.records) {
        const fs::path dir = pred_dir / r.id;
        fs::create_directories(dir);
        const fs::path src = run_root / (kind == BaselineKind::GroundTruth ? r.target_image : r.source_image);
        fs::copy_file(src, dir / "cand_0.png", fs::copy_options::overwrite_existing);
    }
}

}  // namespace forge
