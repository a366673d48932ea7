// aerofuse command-line entry point.

#include "aerofuse/app.hpp"
#include "aerofuse/pmap_io.hpp"
#include "aerofuse/text.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>

using namespace aerofuse;

namespace {

struct Flags {
    // global
    std::string config_path;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::string taxonomy;
    // tile / stitch
    std::string input, tiles_dir, output = "out";
    int tile_size = kDefaultTileSize, overlap = kDefaultTileOverlap;
    int width = 0, height = 0;
    std::string blend = "average";
    // arch-check
    std::string spec;
    int image_size = 512;
    // simulate
    int scenes = 4;
    std::string noise = "calibrated";
    int n_aircraft = synth::calibrated_scene(1).n_aircraft;
    int scene_width = synth::calibrated_scene(1).width;
    int scene_height = synth::calibrated_scene(1).height;
    // run
    std::string manifest, seg_backend, det_backend;
    std::string mode = "balanced";
    int max_iter = 3;
    std::string recovery = "preset";
    // evaluate / compare
    std::vector<std::string> detections;
    std::string run_dir;
    std::string criterion = "over-target";
    int level = 3;
    double threshold = kDefaultMatchThreshold;
    std::vector<std::string> reports;
};

Config base_config(const Flags& f, const CLI::App& app) {
    Config c;
    if (!f.config_path.empty()) c = load_config(f.config_path);
    if (app.count("--seed")) c.seed = f.seed;
    if (app.count("--threads")) c.fusion.threads = f.threads;
    if (app.count("--taxonomy")) c.taxonomy = f.taxonomy;
    return c;
}

void apply_run_flags(Config& c, const Flags& f, const CLI::App& sub) {
    if (sub.count("--mode")) c.fusion.mode = OperatingMode::preset(f.mode);
    if (sub.count("--max-iter")) c.fusion.max_iter = f.max_iter;
    if (sub.count("--recovery") && f.recovery != "preset") c.fusion.mode.enable_recovery = f.recovery == "on";
    if (sub.count("--tile-size")) c.fusion.grid.tile_size = f.tile_size;
    if (sub.count("--overlap")) c.fusion.grid.overlap = f.overlap;
    c.validate();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"aerofuse: segmentation-guided aircraft detection and evaluation"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);
    Flags f;
    if (const char* env = std::getenv(kConfigEnvVar)) f.config_path = env;

    app.add_option("--config", f.config_path,
                   std::string("INI config file (default from $") + kConfigEnvVar + "; see default-config)");
    app.add_option("--seed", f.seed, "Seed for all randomness");
    app.add_option("--threads", f.threads, "Worker threads, 0 = all hardware threads");
    app.add_option("--taxonomy", f.taxonomy, "Taxonomy file (empty = built-in)");

    auto* tile = app.add_subcommand("tile", "Split an image PMAP into overlapping tiles");
    tile->add_option("--input", f.input, "Image PMAP")->required();
    tile->add_option("--out", f.output, "Output directory for <x>_<y>.pmap tiles");
    tile->add_option("--tile-size", f.tile_size, "Tile side in pixels");
    tile->add_option("--overlap", f.overlap, "Overlap between neighbouring tiles in pixels");

    auto* st = app.add_subcommand("stitch", "Reassemble <x>_<y>.pmap tiles into one map");
    st->add_option("--tiles", f.tiles_dir, "Directory of tiles")->required();
    st->add_option("--width", f.width, "Image width")->required();
    st->add_option("--height", f.height, "Image height")->required();
    st->add_option("--out", f.output, "Output PMAP path");
    st->add_option("--blend", f.blend, "Overlap blending")->check(CLI::IsMember({"average", "max"}));

    auto* ac = app.add_subcommand("arch-check", "Validate network descriptors, trace shapes, count anchors");
    ac->add_option("--spec", f.spec, "Spec file with [unet]/[retina] sections (empty = defaults)");
    ac->add_option("--image-size", f.image_size, "Image side for the anchor count");

    auto* sim = app.add_subcommand("simulate", "Write synthetic scenes and both backends' outputs");
    sim->add_option("--out", f.output, "Output directory");
    sim->add_option("--scenes", f.scenes, "Number of scenes");
    sim->add_option("--n-aircraft", f.n_aircraft, "Aircraft per scene");
    sim->add_option("--width", f.scene_width, "Scene width");
    sim->add_option("--height", f.scene_height, "Scene height");
    sim->add_option("--noise", f.noise, "Noise preset")->check(CLI::IsMember({"calibrated", "noiseless"}));

    auto* run = app.add_subcommand("run", "Run the fusion pipeline and both baselines on one scene");
    run->add_option("--manifest", f.manifest, "Scene manifest")->required();
    run->add_option("--seg-backend", f.seg_backend, "Segmentation backend directory (tiles/)")->required();
    run->add_option("--det-backend", f.det_backend, "Detection backend directory (dets/)")->required();
    run->add_option("--out", f.output, "Output run directory");
    run->add_option("--mode", f.mode, "Operating mode preset")
        ->check(CLI::IsMember({"balanced", "recall", "precision"}));
    run->add_option("--max-iter", f.max_iter, "Detection iterations");
    run->add_option("--recovery", f.recovery, "Remainder recovery (preset = as the mode says)")
        ->check(CLI::IsMember({"on", "off", "preset"}));
    run->add_option("--tile-size", f.tile_size, "Tile side in pixels");
    run->add_option("--overlap", f.overlap, "Tile overlap in pixels");

    auto* ev = app.add_subcommand("evaluate", "Score detection lists against a manifest");
    ev->add_option("--manifest", f.manifest, "Ground-truth manifest")->required();
    ev->add_option("--detections", f.detections, "NAME=PATH detection list (repeatable)");
    ev->add_option("--run", f.run_dir, "Run directory (scores its three detection files)");
    ev->add_option("--criterion", f.criterion, "Match overlap rule")
        ->check(CLI::IsMember({"over-target", "iou"}));
    ev->add_option("--threshold", f.threshold, "Minimum overlap for a match");
    ev->add_option("--level", f.level, "Confusion matrix level")->check(CLI::IsMember({2, 3}));
    ev->add_option("--out", f.output, "Directory for report.txt and report.json");

    auto* cmp = app.add_subcommand("compare", "Merge report.json files and flag dominance");
    cmp->add_option("reports", f.reports, "report.json files")->required();
    cmp->add_option("--out", f.output, "Directory for comparison.txt and comparison.json");

    auto* e2e = app.add_subcommand("end-to-end", "simulate (if configured), run, evaluate, compare");
    e2e->add_option("--out", f.output, "Output directory");

    app.add_subcommand("default-config", "Print the configuration file with every default");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("default-config")) {
            std::cout << default_config_document();
            return 0;
        }
        Config cfg = base_config(f, app);

        if (tile->parsed()) {
            const auto g = app::tile_image(f.input, f.output, GridParams{f.tile_size, f.overlap});
            std::cout << "wrote " << g.size() << " tiles to " << f.output << "\n";
        } else if (st->parsed()) {
            app::stitch_tiles(f.tiles_dir, f.width, f.height, f.output,
                              f.blend == "max" ? BlendMode::Max : BlendMode::Average);
            std::cout << "wrote " << f.output << "\n";
        } else if (ac->parsed()) {
            const auto r = app::arch_check(f.spec, f.image_size);
            std::cout << r.text;
            return r.ok ? 0 : 1;
        } else if (sim->parsed()) {
            SimulateConfig s = cfg.simulate.value_or(SimulateConfig{});
            if (sim->count("--noise")) {
                s.noise = f.noise;
                if (f.noise == "noiseless") {
                    s.seg = synth::SyntheticBackendConfig{};
                    s.det = synth::SyntheticBackendConfig{};
                } else {
                    s.seg = synth::calibrated_segmentation(1);
                    s.det = synth::calibrated_detection(1);
                }
            }
            if (sim->count("--scenes")) s.scenes = f.scenes;
            if (sim->count("--n-aircraft")) s.scene.n_aircraft = f.n_aircraft;
            if (sim->count("--width")) s.scene.width = f.scene_width;
            if (sim->count("--height")) s.scene.height = f.scene_height;
            cfg.simulate = s;
            cfg.validate();
            for (const auto& d : app::simulate(cfg, f.output)) std::cout << d << "\n";
        } else if (run->parsed()) {
            apply_run_flags(cfg, f, *run);
            try {
                const auto s = app::run_scene(cfg, f.manifest, f.seg_backend, f.det_backend, f.output);
                std::cout << s.fused << " fused detections (" << s.recovered << " recovered), "
                          << s.segmentation_only << " segmentation-only, " << s.detection_only
                          << " detection-only -> " << f.output << "\n";
            } catch (const std::exception& e) {
                throw app::StageError("run", e.what());
            }
        } else if (ev->parsed()) {
            if (ev->count("--criterion")) cfg.criterion = parse_criterion(f.criterion);
            if (ev->count("--threshold")) cfg.match_threshold = f.threshold;
            if (ev->count("--level")) cfg.report_level = f.level;
            cfg.validate();
            std::vector<NamedBoard> boards;
            if (!f.run_dir.empty()) boards = app::evaluate_run(cfg, f.manifest, f.run_dir);
            std::vector<std::pair<std::string, std::string>> systems;
            for (const auto& d : f.detections) {
                const auto eq = d.find('=');
                if (eq == std::string::npos) {
                    systems.emplace_back(std::filesystem::path(d).stem().string(), d);
                } else {
                    systems.emplace_back(d.substr(0, eq), d.substr(eq + 1));
                }
            }
            for (auto& b : app::evaluate_files(cfg, f.manifest, systems)) boards.push_back(std::move(b));
            if (boards.empty()) throw std::invalid_argument("nothing to evaluate: give --run or --detections");
            app::write_report(boards, cfg.report_level, f.output);
            std::cout << format_report(boards, cfg.report_level);
        } else if (cmp->parsed()) {
            std::cout << format_comparison(app::compare_reports(f.reports, f.output));
        } else if (e2e->parsed()) {
            const auto c = app::end_to_end(cfg, f.output, std::cout);
            std::cout << format_comparison(c);
        }
    } catch (const app::StageError& e) {
        std::cerr << "aerofuse: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "aerofuse: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
