#pragma once

/// @file app.hpp
/// @brief The work behind each command-line subcommand, callable from code.

#include "aerofuse/archspec.hpp"
#include "aerofuse/config.hpp"
#include "aerofuse/evaluation.hpp"
#include "aerofuse/fusion.hpp"
#include "aerofuse/ingest.hpp"

#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace aerofuse::app {

/// Failure of one end-to-end stage (simulate, run, evaluate, compare).
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& message)
        : std::runtime_error("stage '" + stage + "' failed: " + message), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

// Scene directory layout written by simulate:
//   manifest.txt, footprints.pmap, image.pmap (optional),
//   seg/tiles/<x>_<y>.pmap, det/dets/<x>_<y>.txt
inline constexpr const char* kManifestFile = "manifest.txt";
inline constexpr const char* kSegDir = "seg";
inline constexpr const char* kDetDir = "det";

// Run directory layout written by run:
inline constexpr const char* kFusedFile = "detections.txt";
inline constexpr const char* kSegOnlyFile = "segmentation_only.txt";
inline constexpr const char* kDetOnlyFile = "detection_only.txt";
inline constexpr const char* kResidualFile = "residual.pmap";
inline constexpr const char* kTraceFile = "trace.json";

/// Splits an image PMAP into `<x>_<y>.pmap` tiles. Returns the grid used.
TileGrid tile_image(const std::string& input, const std::string& out_dir, GridParams grid);

/// Reassembles `<x>_<y>.pmap` tiles of a width x height image.
void stitch_tiles(const std::string& tiles_dir, int width, int height, const std::string& output,
                  BlendMode mode = BlendMode::Average);

struct ArchReport {
    bool ok = true;
    std::string text;
};

/// Validates a spec file (empty path: the defaults), traces the U-Net and
/// counts anchors at `image_size`.
ArchReport arch_check(const std::string& spec_path, int image_size);

/// Writes `scenes` synthetic scene directories (scene_000, ...) under
/// out_dir and returns their paths.
std::vector<std::string> simulate(const Config& config, const std::string& out_dir);

struct RunSummary {
    std::size_t fused = 0;
    std::size_t segmentation_only = 0;
    std::size_t detection_only = 0;
    std::size_t recovered = 0;
};

/// Runs the pipeline and both single-model baselines on one scene and writes
/// the run directory files.
RunSummary run_scene(const Config& config, const std::string& manifest_path,
                     const std::string& seg_backend, const std::string& det_backend,
                     const std::string& out_dir);

/// Scores named detection files against a manifest.
std::vector<NamedBoard> evaluate_files(const Config& config, const std::string& manifest_path,
                                       const std::vector<std::pair<std::string, std::string>>& systems);

/// Scores the three detection files of a run directory
/// (names: segmentation, detection, fused).
std::vector<NamedBoard> evaluate_run(const Config& config, const std::string& manifest_path,
                                     const std::string& run_dir);

/// Writes report.txt and report.json into out_dir.
void write_report(const std::vector<NamedBoard>& boards, int level, const std::string& out_dir);

/// Sums boards with the same name across report documents.
std::vector<NamedBoard> merge_reports(const std::vector<std::string>& report_paths);

/// Writes comparison.txt and comparison.json into out_dir.
Comparison compare_reports(const std::vector<std::string>& report_paths, const std::string& out_dir);

/// simulate (when configured) -> run -> evaluate -> compare. Throws
/// StageError naming the failed stage. Progress lines go to `log`.
Comparison end_to_end(const Config& config, const std::string& out_dir, std::ostream& log);

}  // namespace aerofuse::app
