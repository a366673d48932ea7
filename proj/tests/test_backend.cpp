#include "doctest.h"

#include "aerofuse/backend.hpp"
#include "aerofuse/fusion.hpp"
#include "aerofuse/pmap_io.hpp"
#include "aerofuse/synthetic.hpp"

#include <filesystem>
#include <fstream>

using namespace aerofuse;
namespace fs = std::filesystem;

namespace {

const Taxonomy& tax() { return Taxonomy::default_taxonomy(); }

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("aerofuse_backend_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write_text(const fs::path& p, const std::string& s) {
    fs::create_directories(p.parent_path());
    std::ofstream(p) << s;
}

synth::SceneParams small_scene(std::uint64_t seed) {
    synth::SceneParams p;
    p.width = 1024;
    p.height = 896;
    p.n_aircraft = 20;
    p.seed = seed;
    return p;
}

}  // namespace

TEST_CASE("detection lists round trip") {
    const std::vector<Detection> d{{{1.5, 2, 30, 40.25}, 0.75, {"F-16", 3}}, {{0, 0, 5, 5}, 1.0, {"bomber", 2}}};
    const auto back = parse_detections(format_detections(d), tax());
    CHECK(back == d);
}

TEST_CASE("detection list validation") {
    CHECK_THROWS_AS(parse_detections("0 0 10 10 1.2 F-16\n", tax()), BackendError);
    CHECK_THROWS_AS(parse_detections("0 0 10 10 0.5 Cessna-9000\n", tax()), BackendError);
    CHECK_THROWS_AS(parse_detections("10 0 0 10 0.5 F-16\n", tax()), BackendError);
    CHECK_THROWS_AS(parse_detections("0 0 10 10 0.5\n", tax()), BackendError);
    CHECK_THROWS_AS(parse_detections("0 0 ten 10 0.5 F-16\n", tax()), BackendError);
    CHECK(parse_detections("# nothing\n\n", tax()).empty());
}

TEST_CASE("restrict_to_window keeps boxes mostly inside and clips them") {
    const std::vector<Detection> d{{{0, 0, 10, 10}, 0.5, {"F-16", 3}},
                                   {{95, 0, 110, 10}, 0.9, {"F-16", 3}},
                                   {{90, 0, 110, 10}, 0.8, {"F-16", 3}}};
    const auto r = restrict_to_window(d, PixelRect{0, 0, 100, 100});
    REQUIRE(r.size() == 2);
    CHECK(r[0].score == 0.8);  // exactly half inside survives
    CHECK(r[0].box.x_max == 100);
    CHECK(r[1].score == 0.5);
}

TEST_CASE("file backend on an empty directory loads but cannot answer") {
    const auto dir = scratch("empty");
    const auto b = FileBackend::load(dir.string(), tax());
    CHECK(!b->has_segmentation());
    CHECK(!b->has_detections());
    const SceneImage img{512, 512, nullptr};
    try {
        b->segment(img, PixelRect{0, 0, 512, 512});
        FAIL("expected an error");
    } catch (const BackendError& e) {
        CHECK(std::string(e.what()).find("missing prediction") != std::string::npos);
    }
    CHECK_THROWS_AS(b->detect(img, PixelRect{0, 0, 512, 512}), BackendError);
    CHECK_THROWS_AS(FileBackend::load((dir / "nope").string(), tax()), BackendError);
}

TEST_CASE("file backend rejects bad inputs") {
    auto dir = scratch("collide");
    write_text(dir / "dets" / "0_0.txt", "");
    write_text(dir / "dets" / "00_0.txt", "");
    CHECK_THROWS_AS(FileBackend::load(dir.string(), tax()), BackendError);

    dir = scratch("level2");
    write_text(dir / "dets" / "0_0.txt", "0 0 5 5 0.5 combat\n");
    CHECK_THROWS_AS(FileBackend::load(dir.string(), tax()), BackendError);

    dir = scratch("badpmap");
    write_text(dir / "tiles" / "0_0.pmap", "PMAPgarbage");
    CHECK_THROWS_AS(FileBackend::load(dir.string(), tax()), BackendError);

    dir = scratch("badname");
    write_text(dir / "dets" / "tile.txt", "");
    CHECK_THROWS_AS(FileBackend::load(dir.string(), tax()), BackendError);
}

TEST_CASE("file backend shifts tile-local detections") {
    const auto dir = scratch("shift");
    write_text(dir / "dets" / "384_0.txt", "10 20 30 40 0.9 F-16\n");
    const auto b = FileBackend::load(dir.string(), tax());
    const auto d = b->detect(SceneImage{896, 512, nullptr}, PixelRect{384, 0, 512, 512});
    REQUIRE(d.size() == 1);
    CHECK(d[0].box == Box{394, 20, 414, 40});
    CHECK_THROWS_AS(b->detect(SceneImage{896, 512, nullptr}, PixelRect{0, 0, 512, 512}), BackendError);
}

TEST_CASE("exported outputs replay through the pipeline identically") {
    const auto scene = synth::generate_scene(small_scene(5), tax());
    auto seg_cfg = synth::calibrated_segmentation(5);
    auto det_cfg = synth::calibrated_detection(5);
    const auto backends = synth::synthetic_backends(scene, seg_cfg, det_cfg, tax());
    const SceneImage img{scene.width, scene.height, nullptr};
    const auto grid = plan_grid(scene.width, scene.height);

    const auto dir = scratch("replay");
    export_backend_outputs(dir.string(), img, grid, backends.segmentation.get(), backends.detection.get());
    const auto file = FileBackend::load(dir.string(), tax());
    CHECK(file->tile_count() == grid.size());

    for (const auto& mode : {"balanced", "recall"}) {
        FusionOptions opt;
        opt.mode = OperatingMode::preset(mode);
        opt.mode.enable_recovery = true;
        const auto live = run_pipeline(img, *backends.segmentation, *backends.detection, opt, tax());
        const auto replay = run_pipeline(img, *file, *file, opt, tax());
        CHECK(live.detections == replay.detections);
        CHECK(detection_only(img, *backends.detection, opt.mode, opt.grid) ==
              detection_only(img, *file, opt.mode, opt.grid));
    }
}

TEST_CASE("noiseless doubles reproduce the ground truth") {
    const auto scene = synth::generate_scene(small_scene(2), tax());
    synth::SyntheticBackendConfig clean;
    clean.confidence_min = clean.confidence_max = 1.0;
    synth::SyntheticSegmentation seg(scene, clean);
    synth::SyntheticDetection det(scene, clean, tax(), &seg);
    CHECK(seg.missed_objects() == 0);
    CHECK(det.false_positives() == 0);
    REQUIRE(det.scene_detections().size() == scene.objects.size());
    for (const auto& o : scene.objects) {
        const bool found = std::any_of(det.scene_detections().begin(), det.scene_detections().end(),
                                       [&](const Detection& d) { return d.box == o.box && d.label.name == o.label; });
        CHECK(found);
    }
    std::size_t painted = 0;
    for (float v : seg.foreground()) painted += v > 0.5f ? 1 : 0;
    std::size_t footprint = 0;
    for (const auto& o : scene.objects) footprint += o.footprint.area();
    CHECK(painted == footprint);
}

TEST_CASE("miss rate is honoured") {
    synth::SceneParams p;
    p.width = 4096;
    p.height = 4096;
    p.n_aircraft = 1000;
    p.n_clusters = 1;
    p.cluster_spread = 5000;
    p.min_length = 20;
    p.max_length = 30;
    const auto scene = synth::generate_scene(p, tax());
    REQUIRE(scene.objects.size() == 1000);
    synth::SyntheticBackendConfig cfg;
    cfg.miss_rate = 0.1;
    cfg.seed = 17;
    const synth::SyntheticDetection det(scene, cfg, tax(), nullptr);
    CHECK(det.missed_objects() >= 70);
    CHECK(det.missed_objects() <= 130);
    CHECK(det.scene_detections().size() == 1000 - det.missed_objects());
}

TEST_CASE("synthetic outputs are deterministic per seed and streams are independent") {
    const auto a = synth::generate_scene(small_scene(9), tax());
    const auto b = synth::generate_scene(small_scene(9), tax());
    REQUIRE(a.objects.size() == b.objects.size());
    for (std::size_t i = 0; i < a.objects.size(); ++i) CHECK(a.objects[i].box == b.objects[i].box);

    auto det_cfg = synth::calibrated_detection(9);
    const auto one = synth::synthetic_backends(a, synth::calibrated_segmentation(9), det_cfg, tax());
    const auto two = synth::synthetic_backends(a, synth::calibrated_segmentation(9), det_cfg, tax());
    CHECK(one.detection->scene_detections() == two.detection->scene_detections());
    CHECK(one.segmentation->foreground() == two.segmentation->foreground());

    // segmentation noise does not move the detection stream when FPs are not coupled
    det_cfg.disjoint_false_positives = false;
    auto seg_other = synth::calibrated_segmentation(9);
    seg_other.miss_rate = 0.3;
    const auto x = synth::synthetic_backends(a, synth::calibrated_segmentation(9), det_cfg, tax());
    const auto y = synth::synthetic_backends(a, seg_other, det_cfg, tax());
    CHECK(x.detection->scene_detections() == y.detection->scene_detections());
    CHECK(x.segmentation->foreground() != y.segmentation->foreground());
}

TEST_CASE("synthetic config validation") {
    synth::SyntheticBackendConfig c;
    CHECK_NOTHROW(c.validate());
    c.miss_rate = 1.5;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.confidence_min = 0.9;
    c.confidence_max = 0.5;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("segmentation double answers tiles with the right geometry") {
    const auto scene = synth::generate_scene(small_scene(3), tax());
    synth::SyntheticSegmentation seg(scene, synth::calibrated_segmentation(3));
    const auto t = seg.segment(SceneImage{scene.width, scene.height, nullptr}, PixelRect{384, 384, 512, 512});
    CHECK(t.width() == 512);
    CHECK(t.is_normalized());
    CHECK(t.foreground(0, 0) == doctest::Approx(seg.foreground()[384u * 1024u + 384u]));
}
