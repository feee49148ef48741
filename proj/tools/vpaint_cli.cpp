// vpaint: batch pipelines over KITTI-layout directories.
//
//   vpaint synth        --out DIR [--synth-frames N] [--synth-spec spec.json]
//   vpaint sparsify     --root DIR --out DIR
//   vpaint virtualpaint --root DIR --out DIR [--stride 4 --max-range 80]
//   vpaint dada-build   --root DIR --out DB [--painted-dir DIR]
//   vpaint dada-apply   --root DIR --donors DB --out DIR
//   vpaint report       --root DIR --out DIR [--format text|json|csv]
//
// Options may also come from a flat key=value file given with --config;
// command-line flags take precedence.

#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <numbers>
#include <sstream>

#include "vpaint/error.hpp"
#include "vpaint/pipeline.hpp"

namespace {

std::vector<std::string> split_frames(const std::string& list) {
    std::vector<std::string> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Virtual point generation, painting and distance-aware augmentation for LiDAR datasets"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "Flat key=value configuration file (flags override it)");

    vpaint::PipelineConfig cfg;
    std::string root, out, frames, depth_dir, scores_dir, painted_dir, donors, synth_spec, format = "text";
    double az_res_deg = 0.2, el_res_deg = 0.4;
    bool no_virtual = false, no_paint = false;

    app.add_option("--root", root, "Dataset root (velodyne/, calib/, label_2/)");
    app.add_option("--frames", frames, "Comma-separated frame ids (default: all)");
    app.add_option("--out", out, "Output directory")->required();
    app.add_option("--workers", cfg.workers, "Worker threads")->capture_default_str();
    app.add_option("--seed", cfg.seed, "Random seed")->capture_default_str();

    app.add_option("--depth-dir", depth_dir, "Dense depth PNG directory (default: <root>/depth_dense)");
    app.add_option("--scores-dir", scores_dir, "VPTN score directory (default: <root>/scores)");
    app.add_option("--painted-dir", painted_dir, "Use VPPC clouds from this directory instead of velodyne bins");
    app.add_option("--donors", donors, "Donor database directory (dada-apply)");
    app.add_option("--image-width", cfg.image_size.width)->capture_default_str();
    app.add_option("--image-height", cfg.image_size.height)->capture_default_str();

    app.add_option("--stride", cfg.virtual_options.stride, "Virtual point pixel stride")->capture_default_str();
    app.add_option("--max-range", cfg.virtual_options.max_range, "Virtual point depth cutoff (m)")->capture_default_str();
    app.add_flag("--no-virtual", no_virtual, "virtualpaint: skip virtual points");
    app.add_flag("--no-paint", no_paint, "virtualpaint: skip painting");

    app.add_option("--offset-min", cfg.dada.offset_min)->capture_default_str();
    app.add_option("--offset-max", cfg.dada.offset_max)->capture_default_str();
    app.add_option("--merge-threshold", cfg.dada.merge_threshold, "Merge distance lambda (m)")->capture_default_str();
    app.add_option("--az-res-deg", az_res_deg)->capture_default_str();
    app.add_option("--el-res-deg", el_res_deg)->capture_default_str();
    app.add_option("--occlusion-min", cfg.dada.occlusion_min)->capture_default_str();
    app.add_option("--occlusion-max", cfg.dada.occlusion_max)->capture_default_str();
    app.add_option("--occlusion-prob", cfg.dada.occlusion_probability)->capture_default_str();
    app.add_option("--near-threshold", cfg.near_threshold, "dada-build: max donor range (m)")->capture_default_str();
    app.add_option("--min-points", cfg.min_points, "dada-build: min donor points")->capture_default_str();
    app.add_option("--box-margin", cfg.box_margin, "Box containment margin (m)")->capture_default_str();
    app.add_option("--max-insert", cfg.max_insert)->capture_default_str();
    app.add_option("--donor-pool", cfg.donor_pool, "Donors processed per frame")->capture_default_str();
    app.add_flag("--balance-classes", cfg.balance_classes, "Round-robin donor classes");

    app.add_option("--format", format, "Report format")->check(CLI::IsMember({"text", "json", "csv"}));
    app.add_option("--synth-frames", cfg.synth_frames)->capture_default_str();
    app.add_option("--synth-classes", cfg.synth_classes)->capture_default_str();
    app.add_option("--synth-spec", synth_spec, "JSON scene description");

    auto* sparsify = app.add_subcommand("sparsify", "Rasterize scans into sparse depth PNGs");
    auto* virtualpaint = app.add_subcommand("virtualpaint", "Fuse virtual points and paint with class scores");
    auto* dada_build = app.add_subcommand("dada-build", "Collect near, dense objects into a donor database");
    auto* dada_apply = app.add_subcommand("dada-apply", "Insert distance-augmented donors into frames");
    auto* report = app.add_subcommand("report", "Distance-binned point and box statistics");
    auto* synth = app.add_subcommand("synth", "Write a synthetic KITTI-layout dataset");

    CLI11_PARSE(app, argc, argv);

    cfg.root = root;
    cfg.out = out;
    cfg.frames = split_frames(frames);
    cfg.depth_dir = depth_dir;
    cfg.scores_dir = scores_dir;
    cfg.painted_dir = painted_dir;
    cfg.donors_dir = donors;
    cfg.synth_spec = synth_spec;
    cfg.use_virtual = !no_virtual;
    cfg.use_paint = !no_paint;
    cfg.dada.grid.azimuth_res = az_res_deg * std::numbers::pi / 180.0;
    cfg.dada.grid.elevation_res = el_res_deg * std::numbers::pi / 180.0;
    cfg.dada.seed = cfg.seed;

    try {
        cfg.report_format = vpaint::parse_report_format(format);
        vpaint::CommandResult result;
        if (*sparsify) result = vpaint::cmd_sparsify(cfg);
        else if (*virtualpaint) result = vpaint::cmd_virtualpaint(cfg);
        else if (*dada_build) result = vpaint::cmd_dada_build(cfg);
        else if (*dada_apply) result = vpaint::cmd_dada_apply(cfg);
        else if (*report) result = vpaint::cmd_report(cfg);
        else if (*synth) result = vpaint::cmd_synth(cfg);
        for (const auto& f : result.failures) std::cerr << "failed: " << f << '\n';
        return result.ok ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
