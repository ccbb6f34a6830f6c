#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "forge/dataset.hpp"
#include "forge/metrics.hpp"

namespace forge {

struct EvalConfig {
    Selector selector = Selector::Ssim;
    int k = 4;
    int padding_px = 8;
    std::vector<double> angle_edges{0, 45, 90, 135, 180, 225, 270, 315, 360};
    int threads = 0;
};

struct ExampleScore {
    std::string id;
    TaskKind task = TaskKind::Rotate;
    std::string membership;
    std::size_t object_count = 0;
    std::optional<double> angle_deg;  // rotations only
    RoiRect roi;
    std::vector<std::string> candidates;  // file names, in k order
    std::vector<CandidateScore> scores;
    std::size_t selected = 0;

    const CandidateScore& best() const { return scores.at(selected); }
};

struct BucketStats {
    std::size_t count = 0;
    double mean_psnr = 0;
    double mean_ssim = 0;
};

/// Buckets keep their insertion order (edge order for angles).
using Buckets = std::vector<std::pair<std::string, BucketStats>>;

struct EvalReport {
    Selector selector = Selector::Ssim;
    int k = 4;
    std::vector<ExampleScore> examples;
    BucketStats overall;
    Buckets by_task;
    Buckets by_membership;
    Buckets by_object_count;  // "1".."4"
    Buckets by_angle;         // rotation slices, then "n/a" for other tasks

    /// Machine-readable report; lpips and fid are reserved as null.
    std::string to_json() const;
    /// Human-readable summary tables.
    std::string to_table() const;
};

/// Best-of-k evaluation of `<pred_dir>/<id>/cand_<i>.png` against the
/// ground-truth targets, inside the ROI bounding the edited object in both
/// masks. Every example needs at least one candidate; otherwise all missing
/// ones are listed in the thrown MetricError.
EvalReport evaluate_set(const Manifest& manifest, const std::filesystem::path& run_root,
                        const std::filesystem::path& pred_dir, const EvalConfig& config);

/// Aggregates scored examples into the report's buckets.
EvalReport summarize(std::vector<ExampleScore> examples, const EvalConfig& config);

enum class BaselineKind { GroundTruth, Source };

/// Writes a prediction directory holding one candidate per example: the
/// target image (a perfect predictor) or the source image (no edit).
void write_baseline(const Manifest& manifest, const std::filesystem::path& run_root,
                    const std::filesystem::path& pred_dir, BaselineKind kind);

}  // namespace forge
