#include "vpaint/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <thread>

#include <json.hpp>

#include "vpaint/error.hpp"
#include "vpaint/io.hpp"
#include "vpaint/rng.hpp"

namespace vpaint {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

fs::path velodyne_path(const PipelineConfig& cfg, const std::string& id) {
    return cfg.root / "velodyne" / (id + ".bin");
}
fs::path calib_path(const PipelineConfig& cfg, const std::string& id) { return cfg.root / "calib" / (id + ".txt"); }
fs::path label_path(const PipelineConfig& cfg, const std::string& id) { return cfg.root / "label_2" / (id + ".txt"); }
fs::path depth_path(const PipelineConfig& cfg, const std::string& id) {
    return (cfg.depth_dir.empty() ? cfg.root / "depth_dense" : cfg.depth_dir) / (id + ".png");
}
fs::path scores_path(const PipelineConfig& cfg, const std::string& id) {
    return (cfg.scores_dir.empty() ? cfg.root / "scores" : cfg.scores_dir) / (id + ".vptn");
}
fs::path painted_path(const PipelineConfig& cfg, const std::string& id) { return cfg.painted_dir / (id + ".vppc"); }

void require(const fs::path& p) {
    if (!fs::exists(p)) throw Error(ErrorCode::MissingInput, p.string());
}

PointCloud load_raw(const PipelineConfig& cfg, const std::string& id) {
    const fs::path p = velodyne_path(cfg, id);
    require(p);
    return io::decode_kitti_bin(io::read_file(p));
}

CalibrationSet load_calib(const PipelineConfig& cfg, const std::string& id, ImageSize size) {
    const fs::path p = calib_path(cfg, id);
    require(p);
    return io::read_calibration(p, size);
}

/// Scene cloud: painted VPPC when a painted directory is configured, else the raw scan.
PaintedCloud load_scene_cloud(const PipelineConfig& cfg, const std::string& id) {
    if (!cfg.painted_dir.empty()) {
        const fs::path p = painted_path(cfg, id);
        require(p);
        return io::decode_painted(io::read_file(p));
    }
    PaintedCloud pc;
    pc.points = load_raw(cfg, id);
    pc.base_dims = pc.points.cols();
    pc.class_dims = 0;
    pc.provenance.assign(pc.points.rows(), Provenance::Raw);
    return pc;
}

std::vector<Box3D> load_boxes(const PipelineConfig& cfg, const std::string& id, const CalibrationSet& calib) {
    const fs::path p = label_path(cfg, id);
    require(p);
    return io::parse_kitti_labels(io::read_text(p), calib);
}

PointCloud base_columns(const PaintedCloud& pc) {
    if (pc.class_dims == 0) return pc.points;
    PointCloud out(pc.base_dims);
    out.reserve(pc.points.rows());
    for (std::size_t i = 0; i < pc.points.rows(); ++i) out.append(pc.points.row(i).first(pc.base_dims));
    return out;
}

void write_manifest(const PipelineConfig& cfg, const std::vector<std::string>& frames, std::vector<json>& entries,
                    const std::vector<std::string>& errors, const std::vector<double>& millis, CommandResult& result) {
    json manifest = json::array();
    json timings = json::array();
    for (std::size_t i = 0; i < frames.size(); ++i) {
        json e = entries[i].is_null() ? json::object() : entries[i];
        json row;
        row["frame"] = frames[i];
        row["status"] = errors[i].empty() ? "ok" : "failed";
        if (!errors[i].empty()) {
            row["error"] = errors[i];
            result.ok = false;
            result.failures.push_back(frames[i] + ": " + errors[i]);
        }
        for (auto& [k, v] : e.items()) row[k] = v;
        manifest.push_back(std::move(row));
        timings.push_back({{"frame", frames[i]}, {"ms", millis[i]}});
    }
    io::write_text_atomic(cfg.out / "manifest.json", manifest.dump(2) + "\n");
    io::write_text_atomic(cfg.out / "timings.json", timings.dump(2) + "\n");
}

/// Runs `fn` over every frame, collecting one JSON entry per frame.
CommandResult run_frames(const PipelineConfig& cfg, const std::vector<std::string>& frames,
                         const std::function<json(const std::string&)>& fn) {
    std::vector<json> entries(frames.size());
    std::vector<double> millis(frames.size(), 0.0);
    const auto errors = parallel_for(frames.size(), cfg.workers, [&](std::size_t i) {
        const auto t0 = std::chrono::steady_clock::now();
        entries[i] = fn(frames[i]);
        millis[i] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    });
    CommandResult result;
    write_manifest(cfg, frames, entries, errors, millis, result);
    return result;
}

std::string frame_name(int index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%06d", index);
    return buf;
}

}  // namespace

void PipelineConfig::validate(bool needs_root) const {
    if (workers < 1) throw Error(ErrorCode::InvalidArgument, "worker count must be at least 1");
    if (out.empty()) throw Error(ErrorCode::InvalidArgument, "an output directory is required");
    if (needs_root && (root.empty() || !fs::is_directory(root))) {
        throw Error(ErrorCode::MissingInput, "dataset root '" + root.string() + "' is not a directory");
    }
    if (!painted_dir.empty() && !fs::is_directory(painted_dir)) {
        throw Error(ErrorCode::MissingInput, "painted directory '" + painted_dir.string() + "' does not exist");
    }
    if (virtual_options.stride < 1) throw Error(ErrorCode::InvalidArgument, "stride must be positive");
    if (!(virtual_options.max_range > 0.0)) throw Error(ErrorCode::InvalidArgument, "max range must be positive");
    if (!(box_margin >= 0.0)) throw Error(ErrorCode::InvalidArgument, "box margin must be non-negative");
    dada.validate();
}

std::vector<std::string> resolve_frames(const PipelineConfig& cfg) {
    std::set<std::string> ids(cfg.frames.begin(), cfg.frames.end());
    if (ids.empty()) {
        const fs::path dir = cfg.root / "velodyne";
        if (fs::is_directory(dir)) {
            for (const auto& entry : fs::directory_iterator(dir)) {
                if (entry.path().extension() == ".bin") ids.insert(entry.path().stem().string());
            }
        }
    }
    return {ids.begin(), ids.end()};
}

std::vector<std::string> parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    std::vector<std::string> errors(n);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (const std::exception& e) {
                errors[i] = e.what();
                if (errors[i].empty()) errors[i] = "unknown error";
            }
        }
    };
    const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), n);
    if (threads <= 1) {
        work();
        return errors;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    return errors;
}

PaintedCloud virtualpaint_frame(const PointCloud& raw, const DepthMap* dense, const ScoreMap* scores,
                                const CalibrationSet& calib, VirtualPointOptions options) {
    const PointCloud virtual_pts = dense ? virtual_points_from_depth(*dense, calib, options) : PointCloud(raw.cols());
    FusedCloud fused = fuse(raw, virtual_pts);
    if (scores) return paint(fused, *scores, calib);
    PaintedCloud out;
    out.base_dims = fused.points.cols();
    out.class_dims = 0;
    out.points = std::move(fused.points);
    out.provenance = std::move(fused.provenance);
    return out;
}

Scene augment_frame(const Scene& scene, const std::vector<BoxSample>& donors,
                    const std::vector<std::string>& donor_frames, const std::string& frame_id,
                    const PipelineConfig& cfg) {
    if (cfg.max_insert == 0 || donors.empty()) return scene;
    Rng rng = Rng::stream(cfg.seed, fnv1a(frame_id));

    std::vector<std::size_t> candidates;
    for (std::size_t i : shuffled_indices(donors.size(), rng)) {
        if (i < donor_frames.size() && donor_frames[i] == frame_id) continue;
        candidates.push_back(i);
    }
    if (cfg.balance_classes) {
        // Round-robin over classes (ascending id), keeping the shuffled order within each class.
        std::map<int, std::vector<std::size_t>> by_class;
        for (std::size_t i : candidates) by_class[donors[i].box.class_id].push_back(i);
        std::vector<std::size_t> balanced;
        for (std::size_t round = 0; balanced.size() < candidates.size(); ++round) {
            for (auto& [id, list] : by_class) {
                if (round < list.size()) balanced.push_back(list[round]);
            }
        }
        candidates = std::move(balanced);
    }
    if (candidates.size() > cfg.donor_pool) candidates.resize(cfg.donor_pool);

    std::vector<BoxSample> pool;
    pool.reserve(candidates.size());
    for (std::size_t i : candidates) pool.push_back(donors[i]);
    DadaConfig dada = cfg.dada;
    dada.seed = rng.next();
    const auto processed = dada_pipeline(pool, dada);
    return gt_aug_insert(scene, processed, cfg.max_insert, rng);
}

CommandResult cmd_sparsify(const PipelineConfig& cfg) {
    cfg.validate();
    const auto frames = resolve_frames(cfg);
    return run_frames(cfg, frames, [&](const std::string& id) {
        const PointCloud cloud = load_raw(cfg, id);
        const CalibrationSet calib = load_calib(cfg, id, cfg.image_size);
        const DepthMap map = sparsify(cloud, calib);
        io::write_file_atomic(cfg.out / (id + ".png"), io::encode_depth_png(map));
        return json{{"points", cloud.rows()}, {"valid_pixels", map.valid_count()}, {"valid_fraction", map.valid_fraction()}};
    });
}

CommandResult cmd_virtualpaint(const PipelineConfig& cfg) {
    cfg.validate();
    const auto frames = resolve_frames(cfg);
    return run_frames(cfg, frames, [&](const std::string& id) {
        const PointCloud raw = load_raw(cfg, id);
        std::optional<DepthMap> dense;
        std::optional<ScoreMap> scores;
        if (cfg.use_virtual) {
            require(depth_path(cfg, id));
            dense = io::decode_depth_png(io::read_file(depth_path(cfg, id)));
        }
        if (cfg.use_paint) {
            require(scores_path(cfg, id));
            scores = io::decode_score_map(io::read_file(scores_path(cfg, id)));
        }
        const ImageSize size = scores ? scores->size() : dense ? dense->size() : cfg.image_size;
        const CalibrationSet calib = load_calib(cfg, id, size);
        const PaintedCloud painted =
            virtualpaint_frame(raw, dense ? &*dense : nullptr, scores ? &*scores : nullptr, calib, cfg.virtual_options);
        io::write_file_atomic(cfg.out / (id + ".vppc"), io::encode_painted(painted));

        const PaintStats stats = paint_stats(painted);
        json entry{{"raw", raw.rows()},
                   {"virtual", painted.points.rows() - raw.rows()},
                   {"total", painted.points.rows()},
                   {"dims", painted.points.cols()}};
        if (scores) {
            entry["background_fraction"] = stats.background_fraction;
            entry["foreground_raw"] = stats.foreground_raw;
            entry["foreground_virtual"] = stats.foreground_virtual;
            entry["class_counts"] = stats.class_counts;
        }
        return entry;
    });
}

CommandResult cmd_dada_build(const PipelineConfig& cfg) {
    cfg.validate();
    const auto frames = resolve_frames(cfg);
    std::vector<std::vector<io::DonorRecord>> records(frames.size());
    std::map<std::string, std::size_t> slot;
    for (std::size_t i = 0; i < frames.size(); ++i) slot[frames[i]] = i;

    CommandResult result = run_frames(cfg, frames, [&](const std::string& id) {
        const PaintedCloud scene = load_scene_cloud(cfg, id);
        const CalibrationSet calib = load_calib(cfg, id, cfg.image_size);
        const auto boxes = load_boxes(cfg, id, calib);
        const PointCloud geometry = scene.points;
        const auto samples = extract_box_samples(geometry, boxes, cfg.box_margin, scene.provenance);
        auto& mine = records[slot.at(id)];
        for (std::size_t k = 0; k < samples.size(); ++k) {
            const BoxSample& s = samples[k];
            if (!(s.box.center.norm() < cfg.near_threshold) || s.points.rows() < cfg.min_points) continue;
            io::DonorRecord rec;
            rec.file = id + "_" + std::to_string(k) + ".vppc";
            rec.frame_id = id;
            rec.box = s.box;
            rec.point_count = s.points.rows();
            PaintedCloud donor{s.points, scene.base_dims, scene.class_dims, s.provenance};
            io::write_file_atomic(cfg.out / rec.file, io::encode_painted(donor));
            mine.push_back(std::move(rec));
        }
        return json{{"boxes", boxes.size()}, {"admitted", mine.size()}};
    });

    std::string index;
    for (const auto& list : records) {
        for (const auto& rec : list) index += io::encode_donor_record(rec) + "\n";
    }
    io::write_text_atomic(cfg.out / "index.jsonl", index);
    return result;
}

CommandResult cmd_dada_apply(const PipelineConfig& cfg) {
    cfg.validate();
    if (cfg.donors_dir.empty()) throw Error(ErrorCode::InvalidArgument, "dada-apply needs a donor database directory");
    const fs::path index_path = cfg.donors_dir / "index.jsonl";
    require(index_path);
    const auto records = io::read_donor_index(index_path);
    std::vector<BoxSample> donors;
    std::vector<std::string> donor_frames;
    donors.reserve(records.size());
    for (const auto& rec : records) {
        PaintedCloud pc = io::decode_painted(io::read_file(cfg.donors_dir / rec.file));
        if (pc.points.rows() != rec.point_count) {
            throw Error(ErrorCode::Format, rec.file + ": point count disagrees with the index");
        }
        donors.push_back({rec.box, std::move(pc.points), std::move(pc.provenance)});
        donor_frames.push_back(rec.frame_id);
    }

    const auto frames = resolve_frames(cfg);
    return run_frames(cfg, frames, [&](const std::string& id) {
        const PaintedCloud cloud = load_scene_cloud(cfg, id);
        const std::string calib_text = io::read_text(calib_path(cfg, id));
        const CalibrationSet calib = parse_calibration(calib_text, cfg.image_size);
        require(label_path(cfg, id));
        std::string label_text = io::read_text(label_path(cfg, id));
        Scene scene{cloud.points, cloud.provenance, io::parse_kitti_labels(label_text, calib)};
        const std::size_t boxes_in = scene.boxes.size();
        scene = augment_frame(scene, donors, donor_frames, id, cfg);

        if (cfg.painted_dir.empty()) {
            io::write_file_atomic(cfg.out / "velodyne" / (id + ".bin"), io::encode_kitti_bin(scene.points));
        } else {
            PaintedCloud out{scene.points, cloud.base_dims, cloud.class_dims, scene.provenance};
            io::write_file_atomic(cfg.out / "painted" / (id + ".vppc"), io::encode_painted(out));
        }
        // Original label lines pass through verbatim; inserted boxes are appended.
        const std::vector<Box3D> inserted(scene.boxes.begin() + static_cast<std::ptrdiff_t>(boxes_in), scene.boxes.end());
        if (!inserted.empty() && !label_text.empty() && label_text.back() != '\n') label_text += '\n';
        io::write_text_atomic(cfg.out / "label_2" / (id + ".txt"), label_text + io::format_kitti_labels(inserted, calib));
        io::write_text_atomic(cfg.out / "calib" / (id + ".txt"), calib_text);
        return json{{"boxes_in", boxes_in}, {"boxes_out", scene.boxes.size()}, {"points", scene.points.rows()}};
    });
}

CommandResult cmd_report(const PipelineConfig& cfg) {
    cfg.validate();
    const auto frames = resolve_frames(cfg);
    std::vector<DistanceBinReport> reports(frames.size());
    std::map<std::string, std::size_t> slot;
    for (std::size_t i = 0; i < frames.size(); ++i) slot[frames[i]] = i;

    CommandResult result = run_frames(cfg, frames, [&](const std::string& id) {
        const PaintedCloud cloud = load_scene_cloud(cfg, id);
        const CalibrationSet calib = load_calib(cfg, id, cfg.image_size);
        const auto boxes = load_boxes(cfg, id, calib);
        const PointCloud geometry = base_columns(cloud);
        DistanceBinReport r = distance_report(geometry, boxes, cloud.class_dims > 0 ? &cloud : nullptr, cfg.box_margin);
        const std::size_t points = r.total_points();
        reports[slot.at(id)] = std::move(r);
        return json{{"points", points}, {"boxes", boxes.size()}};
    });

    DistanceBinReport total = DistanceBinReport::empty();
    for (const auto& r : reports) {
        if (!r.bins.empty()) total.merge(r);
    }
    const char* ext = cfg.report_format == ReportFormat::Json ? "json"
                      : cfg.report_format == ReportFormat::Csv ? "csv"
                                                                : "txt";
    io::write_text_atomic(cfg.out / (std::string("report.") + ext), emit_report(total, cfg.report_format));
    return result;
}

CommandResult cmd_synth(const PipelineConfig& cfg) {
    cfg.validate(false);
    if (cfg.synth_frames < 1) throw Error(ErrorCode::InvalidArgument, "synth needs at least one frame");
    std::optional<SynthSceneSpec> fixed;
    if (!cfg.synth_spec.empty()) fixed = parse_synth_spec(io::read_text(cfg.synth_spec));

    std::vector<std::string> frames;
    for (int i = 0; i < cfg.synth_frames; ++i) frames.push_back(frame_name(i));
    return run_frames(cfg, frames, [&](const std::string& id) {
        const auto index = static_cast<std::uint64_t>(std::stoi(id));
        SynthSceneSpec spec;
        if (fixed) {
            spec = *fixed;
            spec.seed = fixed->seed + index;
        } else {
            spec = random_scene(Rng::stream(cfg.seed, index).next());
        }
        const SynthScan scan = generate_scan(spec);
        const CalibrationSet calib = scan.calib.with_image_size(cfg.image_size);
        const CameraRender render = render_camera(spec, calib);
        const ScoreMap scores = scores_from_classes(render.class_ids, calib.image_size(), cfg.synth_classes);

        io::write_file_atomic(cfg.out / "velodyne" / (id + ".bin"), io::encode_kitti_bin(scan.cloud));
        io::write_text_atomic(cfg.out / "calib" / (id + ".txt"), format_calibration(calib));
        // Objects without a single LiDAR return are left unlabeled.
        std::vector<Box3D> observed;
        for (const auto& sample : extract_box_samples(scan.cloud, scan.boxes, cfg.box_margin)) {
            if (!sample.points.empty()) observed.push_back(sample.box);
        }
        io::write_text_atomic(cfg.out / "label_2" / (id + ".txt"), io::format_kitti_labels(observed, calib));
        io::write_file_atomic(cfg.out / "depth_dense" / (id + ".png"), io::encode_depth_png(render.depth));
        io::write_file_atomic(cfg.out / "scores" / (id + ".vptn"), io::encode_score_map(scores));
        return json{{"points", scan.cloud.rows()}, {"boxes", scan.boxes.size()}, {"labeled", observed.size()}};
    });
}

SynthSceneSpec parse_synth_spec(std::string_view json_text) {
    try {
        const auto j = nlohmann::json::parse(json_text);
        SynthSceneSpec spec;
        if (j.contains("beam_elevations_deg")) {
            for (double e : j.at("beam_elevations_deg").get<std::vector<double>>()) spec.beam_elevations.push_back(e * kDeg);
        } else {
            spec.beam_elevations = default_beam_elevations(j.value("beams", 64));
        }
        spec.azimuth_step = j.value("azimuth_step_deg", 0.2) * kDeg;
        spec.max_range = j.value("max_range", spec.max_range);
        spec.ground_z = j.value("ground_z", spec.ground_z);
        spec.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("boxes")) {
            for (const auto& jb : j.at("boxes")) {
                SynthBox b;
                const auto c = jb.at("center").get<std::vector<double>>();
                const auto s = jb.at("size").get<std::vector<double>>();
                if (c.size() != 3 || s.size() != 3) throw Error(ErrorCode::Format, "synth box center/size need 3 values");
                b.box.center = {c[0], c[1], c[2]};
                b.box.length = s[0];
                b.box.width = s[1];
                b.box.height = s[2];
                b.box.yaw = wrap_angle(jb.value("yaw_deg", 0.0) * kDeg);
                b.box.class_id = jb.value("class_id", 1);
                b.density = jb.value("density", 1.0);
                spec.boxes.push_back(b);
            }
        }
        spec.validate();
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Format, std::string("synth spec: ") + e.what());
    }
}

std::string format_synth_spec(const SynthSceneSpec& spec) {
    json j;
    std::vector<double> el;
    for (double e : spec.beam_elevations) el.push_back(e / kDeg);
    j["beam_elevations_deg"] = el;
    j["azimuth_step_deg"] = spec.azimuth_step / kDeg;
    j["max_range"] = spec.max_range;
    j["ground_z"] = spec.ground_z;
    j["seed"] = spec.seed;
    j["boxes"] = json::array();
    for (const auto& b : spec.boxes) {
        j["boxes"].push_back({{"center", {b.box.center.x(), b.box.center.y(), b.box.center.z()}},
                              {"size", {b.box.length, b.box.width, b.box.height}},
                              {"yaw_deg", b.box.yaw / kDeg},
                              {"class_id", b.box.class_id},
                              {"density", b.density}});
    }
    return j.dump(2) + "\n";
}

}  // namespace vpaint
