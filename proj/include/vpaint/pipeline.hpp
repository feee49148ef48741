#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "vpaint/dada.hpp"
#include "vpaint/depth_map.hpp"
#include "vpaint/painting.hpp"
#include "vpaint/report.hpp"
#include "vpaint/synth.hpp"

namespace vpaint {

/**
 * Settings shared by the batch commands. Dataset paths follow the KITTI
 * object layout under `root`: velodyne/<id>.bin, calib/<id>.txt,
 * label_2/<id>.txt. Derived inputs default to siblings of those directories
 * (depth_dense/<id>.png, scores/<id>.vptn) and can be pointed elsewhere.
 */
struct PipelineConfig {
    std::filesystem::path root;
    std::vector<std::string> frames;  // empty: every velodyne/*.bin under root
    std::filesystem::path out;
    int workers = 1;
    std::uint64_t seed = 0;

    // Derived input locations; empty means the default under root.
    std::filesystem::path depth_dir;
    std::filesystem::path scores_dir;
    std::filesystem::path painted_dir;  // VPPC clouds to use instead of velodyne bins
    std::filesystem::path donors_dir;

    // virtualpaint stage toggles
    bool use_virtual = true;
    bool use_paint = true;
    VirtualPointOptions virtual_options;

    // donor database and insertion
    DadaConfig dada;
    double near_threshold = 25.0;
    std::size_t min_points = 50;
    double box_margin = 0.02;
    std::size_t max_insert = 6;
    std::size_t donor_pool = 24;
    bool balance_classes = false;

    ReportFormat report_format = ReportFormat::Text;
    /// Image size assumed for calibrations when no image-sized input is read.
    ImageSize image_size{1216, 352};

    // synth
    int synth_frames = 4;
    int synth_classes = 4;
    std::filesystem::path synth_spec;

    /// Throws InvalidArgument / MissingInput for unusable settings.
    void validate(bool needs_root = true) const;
};

/// Outcome of one batch command; `ok` is false if any frame failed.
struct CommandResult {
    bool ok = true;
    std::vector<std::string> failures;  // "<frame>: <message>"
};

/// Sorted frame ids: cfg.frames if set, else the stems of velodyne/*.bin.
std::vector<std::string> resolve_frames(const PipelineConfig& cfg);

/// Runs fn(i) for i in [0, n) on `workers` threads. Exceptions are returned
/// per index as messages (empty string on success).
std::vector<std::string> parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

/// Fused (raw + virtual) cloud for one frame, painted when `scores` is given.
PaintedCloud virtualpaint_frame(const PointCloud& raw, const DepthMap* dense, const ScoreMap* scores,
                                const CalibrationSet& calib, VirtualPointOptions options);

/// DADA insertion for one frame. Donors from `frame_id` itself are skipped.
/// The randomness derives from (seed, frame_id) only.
Scene augment_frame(const Scene& scene, const std::vector<BoxSample>& donors,
                    const std::vector<std::string>& donor_frames, const std::string& frame_id,
                    const PipelineConfig& cfg);

CommandResult cmd_sparsify(const PipelineConfig& cfg);
CommandResult cmd_virtualpaint(const PipelineConfig& cfg);
CommandResult cmd_dada_build(const PipelineConfig& cfg);
CommandResult cmd_dada_apply(const PipelineConfig& cfg);
CommandResult cmd_report(const PipelineConfig& cfg);
/// Writes a synthetic KITTI-layout dataset (velodyne, calib, label_2,
/// depth_dense, scores) to cfg.out.
CommandResult cmd_synth(const PipelineConfig& cfg);

/// JSON (de)serialization of SynthSceneSpec; angles in degrees in the file.
SynthSceneSpec parse_synth_spec(std::string_view json_text);
std::string format_synth_spec(const SynthSceneSpec& spec);

}  // namespace vpaint
