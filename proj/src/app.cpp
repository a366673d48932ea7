#include "aerofuse/app.hpp"

#include "aerofuse/backend.hpp"
#include "aerofuse/pmap_io.hpp"
#include "aerofuse/scene.hpp"
#include "aerofuse/synthetic.hpp"
#include "aerofuse/text.hpp"

#include <cstdio>
#include <filesystem>

namespace aerofuse::app {

namespace fs = std::filesystem;

TileGrid tile_image(const std::string& input, const std::string& out_dir, GridParams grid) {
    const Raster image = pmap::read(input);
    const TileGrid g = plan_grid(image.width(), image.height(), grid);
    fs::create_directories(out_dir);
    for (const auto& o : g.origins()) {
        const PixelRect r = g.rect(o);
        pmap::write((fs::path(out_dir) / (r.key() + ".pmap")).string(),
                    image.crop(r.x, r.y, r.width, r.height));
    }
    return g;
}

void stitch_tiles(const std::string& tiles_dir, int width, int height, const std::string& output,
                  BlendMode mode) {
    if (!fs::is_directory(tiles_dir)) throw IngestError("tile directory '" + tiles_dir + "' does not exist");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(tiles_dir)) {
        if (e.is_regular_file() && e.path().extension() == ".pmap") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<TilePrediction> tiles;
    for (const auto& f : files) {
        const auto stem = f.stem().string();
        const auto us = stem.find('_');
        const auto x = us == std::string::npos ? std::nullopt
                                               : text::parse_number<int>(std::string_view(stem).substr(0, us));
        const auto y = us == std::string::npos ? std::nullopt
                                               : text::parse_number<int>(std::string_view(stem).substr(us + 1));
        if (!x || !y) throw IngestError("tile file '" + f.string() + "' is not named <x>_<y>.pmap");
        tiles.push_back({TileOrigin{*x, *y}, PredictionMap(pmap::read(f.string()))});
    }
    const PredictionMap out = stitch(tiles, width, height, mode);
    pmap::write(output, out.raster());
}

ArchReport arch_check(const std::string& spec_path, int image_size) {
    arch::UNetSpec unet;
    arch::RetinaSpec retina;
    if (!spec_path.empty()) {
        const auto file = arch::parse_spec_file(text::read_file(spec_path));
        if (file.unet) unet = *file.unet;
        if (file.retina) retina = *file.retina;
    }
    ArchReport r;
    std::string& out = r.text;
    const auto uv = arch::validate(unet);
    const auto rv = arch::validate(retina);
    for (const auto& v : uv) out += "unet violation: " + v.field + ": " + v.rule + "\n";
    for (const auto& v : rv) out += "retina violation: " + v.field + ": " + v.rule + "\n";
    r.ok = uv.empty() && rv.empty();
    if (uv.empty()) {
        try {
            const auto trace = arch::propagate_unet(unet);
            out += "U-Net shape trace\n" + arch::format_trace(trace);
            out += "downsamplings: " + std::to_string(arch::count_stages(trace, arch::StageKind::Downsample)) + "\n";
            out += "encoder conv layers: " + std::to_string(unet.encoder_conv_layers()) + "\n";
            out += "decoder conv layers: " + std::to_string(unet.decoder_conv_layers()) + "\n";
        } catch (const arch::ArchError& e) {
            out += std::string("unet error: ") + e.what() + "\n";
            r.ok = false;
        }
    }
    if (rv.empty()) {
        const auto levels = arch::anchors_per_level(retina, image_size);
        out += "RetinaNet anchors at " + std::to_string(image_size) + " px\n";
        for (std::size_t i = 0; i < levels.size(); ++i) {
            out += "  stride " + std::to_string(retina.pyramid_strides[i]) + ": " + std::to_string(levels[i]) + "\n";
        }
        out += "  total: " + std::to_string(arch::anchor_count(retina, image_size)) + "\n";
    }
    out += r.ok ? "arch-check: ok\n" : "arch-check: FAILED\n";
    return r;
}

std::vector<std::string> simulate(const Config& config, const std::string& out_dir) {
    const SimulateConfig sim = config.simulate.value_or(SimulateConfig{});
    const Taxonomy taxonomy = load_taxonomy(config);
    std::vector<std::string> dirs;
    for (int k = 0; k < sim.scenes; ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "scene_%03d", k);
        const fs::path dir = fs::path(out_dir) / name;
        fs::create_directories(dir);
        const std::uint64_t seed = scene_seed(config.seed, k);

        auto params = sim.scene;
        params.seed = seed;
        SceneManifest scene = synth::generate_scene(params, taxonomy);
        scene.footprints_path = "footprints.pmap";
        Raster image;
        if (sim.write_image) {
            scene.image_path = "image.pmap";
            image = synth::render_image(scene, seed);
            pmap::write((dir / scene.image_path).string(), image);
        }
        pmap::write((dir / scene.footprints_path).string(), footprint_raster(scene));
        text::write_file((dir / kManifestFile).string(), format_manifest(scene));

        auto seg_cfg = sim.seg;
        auto det_cfg = sim.det;
        seg_cfg.seed = seed;
        det_cfg.seed = seed;
        const auto backends = synth::synthetic_backends(scene, seg_cfg, det_cfg, taxonomy);
        const SceneImage img{scene.width, scene.height, sim.write_image ? &image : nullptr};
        const TileGrid grid = plan_grid(scene.width, scene.height, config.fusion.grid);
        export_backend_outputs((dir / kSegDir).string(), img, grid, backends.segmentation.get(), nullptr);
        export_backend_outputs((dir / kDetDir).string(), img, grid, nullptr, backends.detection.get());
        dirs.push_back(dir.string());
    }
    return dirs;
}

RunSummary run_scene(const Config& config, const std::string& manifest_path,
                     const std::string& seg_backend, const std::string& det_backend,
                     const std::string& out_dir) {
    const Taxonomy taxonomy = load_taxonomy(config);
    const SceneManifest scene = load_manifest(manifest_path, taxonomy);
    FileBackendOptions fo;
    fo.tile_size = config.fusion.grid.tile_size;
    const auto seg = FileBackend::load(seg_backend, taxonomy, fo);
    const auto det = FileBackend::load(det_backend, taxonomy, fo);
    const SceneImage img{scene.width, scene.height, nullptr};

    const FusionResult result = run_pipeline(img, *seg, *det, config.fusion, taxonomy);
    const auto seg_only = segmentation_only(result.segmentation, config.fusion.mode, taxonomy);
    const auto det_only = detection_only(img, *det, config.fusion.mode, config.fusion.grid,
                                         config.fusion.nms_threshold);

    const fs::path dir(out_dir);
    fs::create_directories(dir);
    write_detections((dir / kFusedFile).string(), result.detections);
    write_detections((dir / kSegOnlyFile).string(), seg_only);
    write_detections((dir / kDetOnlyFile).string(), det_only);
    pmap::write((dir / kResidualFile).string(), pmap::mask_to_raster(result.residual));
    text::write_file((dir / kTraceFile).string(), trace_document(result, config.fusion));
    return RunSummary{result.detections.size(), seg_only.size(), det_only.size(),
                      result.trace.recovered.size()};
}

std::vector<NamedBoard> evaluate_files(const Config& config, const std::string& manifest_path,
                                       const std::vector<std::pair<std::string, std::string>>& systems) {
    const Taxonomy taxonomy = load_taxonomy(config);
    const SceneManifest scene = load_manifest(manifest_path, taxonomy);
    std::vector<NamedBoard> out;
    for (const auto& [name, path] : systems) {
        const auto dets = read_detections(path, taxonomy);
        const auto m = match(scene.objects, dets, config.criterion, config.match_threshold);
        out.push_back({name, score(m, scene.objects, dets, taxonomy)});
    }
    return out;
}

std::vector<NamedBoard> evaluate_run(const Config& config, const std::string& manifest_path,
                                     const std::string& run_dir) {
    const fs::path d(run_dir);
    return evaluate_files(config, manifest_path,
                          {{"segmentation", (d / kSegOnlyFile).string()},
                           {"detection", (d / kDetOnlyFile).string()},
                           {"fused", (d / kFusedFile).string()}});
}

void write_report(const std::vector<NamedBoard>& boards, int level, const std::string& out_dir) {
    fs::create_directories(out_dir);
    text::write_file((fs::path(out_dir) / "report.txt").string(), format_report(boards, level));
    text::write_file((fs::path(out_dir) / "report.json").string(), report_document(boards));
}

std::vector<NamedBoard> merge_reports(const std::vector<std::string>& report_paths) {
    std::vector<NamedBoard> merged;
    for (const auto& path : report_paths) {
        for (auto& b : parse_report_document(text::read_file(path))) {
            auto it = std::find_if(merged.begin(), merged.end(),
                                   [&](const NamedBoard& m) { return m.name == b.name; });
            if (it == merged.end()) {
                merged.push_back(std::move(b));
            } else {
                it->board += b.board;
            }
        }
    }
    return merged;
}

Comparison compare_reports(const std::vector<std::string>& report_paths, const std::string& out_dir) {
    Comparison c = compare(merge_reports(report_paths));
    fs::create_directories(out_dir);
    text::write_file((fs::path(out_dir) / "comparison.txt").string(), format_comparison(c));
    text::write_file((fs::path(out_dir) / "comparison.json").string(), comparison_document(c));
    return c;
}

Comparison end_to_end(const Config& config, const std::string& out_dir, std::ostream& log) {
    auto stage = [](const char* name, auto&& fn) {
        try {
            return fn();
        } catch (const StageError&) {
            throw;
        } catch (const std::exception& e) {
            throw StageError(name, e.what());
        }
    };
    const fs::path root(out_dir);

    struct Input {
        std::string name, manifest, seg, det;
    };
    std::vector<Input> inputs;
    if (config.simulate) {
        const auto dirs = stage("simulate", [&] { return simulate(config, (root / "scenes").string()); });
        for (const auto& d : dirs) {
            const fs::path p(d);
            inputs.push_back({p.filename().string(), (p / kManifestFile).string(), (p / kSegDir).string(),
                              (p / kDetDir).string()});
        }
        log << "simulate: " << dirs.size() << " scene(s)\n";
    } else {
        if (config.manifest.empty() || config.seg_backend.empty() || config.det_backend.empty()) {
            throw StageError("run", "no [simulate] section and [inputs] manifest/seg_backend/det_backend not all set");
        }
        inputs.push_back({"scene", config.manifest, config.seg_backend, config.det_backend});
    }

    std::vector<std::string> reports;
    for (const auto& in : inputs) {
        const auto run_dir = (root / "runs" / in.name).string();
        const auto s = stage("run", [&] { return run_scene(config, in.manifest, in.seg, in.det, run_dir); });
        log << "run " << in.name << ": " << s.fused << " fused, " << s.segmentation_only
            << " segmentation-only, " << s.detection_only << " detection-only, " << s.recovered
            << " recovered\n";
        stage("evaluate", [&] {
            write_report(evaluate_run(config, in.manifest, run_dir), config.report_level, run_dir);
            return 0;
        });
        reports.push_back((fs::path(run_dir) / "report.json").string());
    }
    return stage("compare", [&] { return compare_reports(reports, out_dir); });
}

}  // namespace aerofuse::app
