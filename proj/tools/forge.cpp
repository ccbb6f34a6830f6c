// forge: generate, re-render, evaluate and inspect object-editing datasets.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "forge/catalog.hpp"
#include "forge/dataset.hpp"
#include "forge/error.hpp"
#include "forge/eval.hpp"

namespace fs = std::filesystem;

namespace {

int cmd_generate(const std::string& config_path, bool resume, int threads, bool quiet) {
    forge::RunConfig config = forge::load_run_config(config_path);
    if (threads > 0) config.threads = threads;
    const auto s = forge::generate(config, {resume, quiet});
    std::printf("generated %zu, reused %zu, skipped %zu in %.1f s -> %s\n", s.generated, s.reused, s.skipped,
                s.seconds, config.output_root.string().c_str());
    return 0;
}

int cmd_rerender(const std::string& manifest, const std::string& out, int size, int spp) {
    forge::RerenderOptions opt;
    if (!out.empty()) opt.output_root = out;
    if (size > 0) opt.resolution = forge::Resolution{size, size};
    if (spp > 0) opt.samples_per_pixel = spp;
    const std::size_t n = forge::rerender(manifest, opt);
    std::printf("re-rendered %zu examples\n", n);
    return 0;
}

std::vector<double> run_angle_edges(const fs::path& manifest) {
    const fs::path cfg = manifest.parent_path() / "config.txt";
    if (fs::exists(cfg)) return forge::load_run_config(cfg).angle_edges;
    return forge::EvalConfig{}.angle_edges;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw forge::IoError("cannot write " + p.string());
    out << text;
}

int cmd_eval(const std::string& manifest_path, const std::string& pred, const std::string& selector, int k,
             const std::string& out_dir, int threads) {
    forge::EvalConfig cfg;
    const auto sel = forge::selector_from_string(selector);
    if (!sel) throw forge::Error("unknown selector '" + selector + "' (use ssim or psnr)");
    cfg.selector = *sel;
    cfg.k = k;
    cfg.threads = threads;
    cfg.angle_edges = run_angle_edges(manifest_path);
    const forge::Manifest manifest = forge::read_manifest(manifest_path);
    fs::path root = fs::path(manifest_path).parent_path();
    if (root.empty()) root = ".";
    const forge::EvalReport report = forge::evaluate_set(manifest, root, pred, cfg);
    const fs::path out = out_dir.empty() ? fs::path(pred) : fs::path(out_dir);
    fs::create_directories(out);
    write_file(out / "report.json", report.to_json());
    const std::string table = report.to_table();
    write_file(out / "report.txt", table);
    std::cout << table;
    return 0;
}

int cmd_stats(const std::string& catalog, const std::string& manifest) {
    if (!catalog.empty()) {
        const forge::Catalog c = catalog == "builtin" ? forge::builtin_catalog() : forge::load_catalog(catalog);
        std::cout << forge::catalog_stats_report(c) << "\n";
    } else {
        std::cout << forge::manifest_stats_report(forge::read_manifest(manifest), run_angle_edges(manifest))
                  << "\n";
    }
    return 0;
}

int cmd_baseline(const std::string& manifest_path, const std::string& pred, const std::string& kind) {
    forge::BaselineKind k;
    if (kind == "gt")
        k = forge::BaselineKind::GroundTruth;
    else if (kind == "source")
        k = forge::BaselineKind::Source;
    else
        throw forge::Error("unknown baseline '" + kind + "' (use gt or source)");
    fs::path root = fs::path(manifest_path).parent_path();
    if (root.empty()) root = ".";
    forge::write_baseline(forge::read_manifest(manifest_path), root, pred, k);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"forge: object-editing benchmark generator and evaluator"};
    app.require_subcommand(1);

    std::string config_path, manifest, pred, selector = "ssim", out, catalog, kind = "gt";
    bool resume = false, quiet = false;
    int k = 4, threads = 0, size = 0, spp = 0;

    auto* gen = app.add_subcommand("generate", "Generate a dataset from a run config");
    gen->add_option("--config", config_path, "Run configuration file")->required()->check(CLI::ExistingFile);
    gen->add_flag("--resume", resume, "Continue an interrupted run, keeping finished examples");
    gen->add_option("--threads", threads, "Worker threads (default: all cores)");
    gen->add_flag("--quiet", quiet, "No per-example log lines");

    auto* rer = app.add_subcommand("rerender", "Render every example of a manifest again");
    rer->add_option("--manifest", manifest, "manifest.jsonl of a run")->required()->check(CLI::ExistingFile);
    rer->add_option("--out", out, "Output root (default: the run root)");
    rer->add_option("--size", size, "Square resolution override");
    rer->add_option("--spp", spp, "Samples per pixel override");

    auto* ev = app.add_subcommand("eval", "Best-of-k evaluation of predictions");
    ev->add_option("--manifest", manifest, "manifest.jsonl of a run")->required()->check(CLI::ExistingFile);
    ev->add_option("--pred", pred, "Prediction directory: <id>/cand_<k>.png")->required();
    ev->add_option("--selector", selector, "Candidate selector")->check(CLI::IsMember({"ssim", "psnr"}));
    ev->add_option("--k", k, "Candidates per example")->check(CLI::PositiveNumber);
    ev->add_option("--out", out, "Report directory (default: the prediction directory)");
    ev->add_option("--threads", threads, "Worker threads");

    auto* st = app.add_subcommand("stats", "Summary statistics of a catalog or manifest");
    auto* st_cat = st->add_option("--catalog", catalog, "Catalog manifest, or 'builtin'");
    auto* st_man = st->add_option("--manifest", manifest, "Dataset manifest");
    st_cat->excludes(st_man);
    st->require_option(1);

    auto* base = app.add_subcommand("baseline", "Write ground-truth or no-edit predictions for a manifest");
    base->add_option("--manifest", manifest, "manifest.jsonl of a run")->required()->check(CLI::ExistingFile);
    base->add_option("--pred", pred, "Prediction directory to write")->required();
    base->add_option("--kind", kind, "gt or source")->check(CLI::IsMember({"gt", "source"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) return cmd_generate(config_path, resume, threads, quiet);
        if (*rer) return cmd_rerender(manifest, out, size, spp);
        if (*ev) return cmd_eval(manifest, pred, selector, k, out, threads);
        if (*st) return cmd_stats(catalog, manifest);
        if (*base) return cmd_baseline(manifest, pred, kind);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "forge: %s\n", e.what());
        return 1;
    }
    return 2;
}
