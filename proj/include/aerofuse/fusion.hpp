#pragma once

/// @file fusion.hpp
/// @brief Segmentation-guided detection: localize positive areas, query the
/// detector around them with erasure between rounds, optionally promote
/// leftover regions, then suppress duplicates.

#include "aerofuse/backend.hpp"
#include "aerofuse/ingest.hpp"
#include "aerofuse/raster.hpp"
#include "aerofuse/taxonomy.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace aerofuse {

/// Error raised by run_pipeline; `stage()` names the step that failed.
class PipelineError : public std::runtime_error {
public:
    PipelineError(std::string stage, const std::string& message)
        : std::runtime_error(stage + ": " + message), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

struct OperatingMode {
    std::string name = "balanced";
    double seg_threshold = 0.5;
    double seg_min_size = 300.0;
    double det_threshold = 0.5;
    double det_min_size = 100.0;
    bool enable_recovery = false;

    /// "balanced", "recall" or "precision"; throws std::invalid_argument
    /// for anything else.
    static OperatingMode preset(std::string_view name);
    static std::vector<std::string> preset_names();
    /// Throws std::invalid_argument when a threshold or size is out of domain.
    void validate() const;
};

struct RecoveryParams {
    /// Accepted residual area relative to the median detected box area.
    double size_min = 0.2;
    double size_max = 2.0;
    /// Largest centroid distance (px) to the nearest detection box edge.
    double max_distance = 250.0;
    /// Pixel-area band used when there is no detection to compare with;
    /// the distance rule is waived in that case.
    double fallback_min_area = 200.0;
    double fallback_max_area = 5000.0;

    void validate() const;
};

struct FusionOptions {
    OperatingMode mode;
    RecoveryParams recovery;
    GridParams grid;
    int max_iter = 3;
    /// Minimum side of the detector window around a region.
    int window = kDefaultTileSize;
    double nms_threshold = kDefaultNmsThreshold;
    /// Worker threads for tile and region queries; 0 picks the hardware
    /// concurrency. Results do not depend on this.
    unsigned threads = 1;

    void validate() const;
};

/// Thresholded, connected, size-filtered positive areas.
std::vector<Region> localize(const PredictionMap& map, const OperatingMode& mode);

/// Detector window for a region: the region box grown symmetrically to at
/// least `min_side` per axis, then clipped to the image.
PixelRect detection_window(const Region& region, int min_side, int image_width, int image_height);

struct IterationTrace {
    int iteration = 0;
    std::size_t regions = 0;
    std::size_t candidates = 0;
    std::vector<Detection> added;
};

struct DetectionStage {
    std::vector<Detection> detections;
    BinaryMask residual;
    /// Size-filtered regions of the residual mask.
    std::vector<Region> residual_regions;
    std::vector<IterationTrace> iterations;
};

/// Iterative detection over positive areas. `mask` is the thresholded map
/// the regions came from; kept boxes are erased from it between rounds.
/// A candidate is kept when it passes the detector thresholds, touches a
/// current region pixel and survives NMS against everything kept so far.
DetectionStage detect_iterative(const SceneImage& image, BinaryMask mask,
                                std::vector<Region> regions, const DetectionBackend& det,
                                const FusionOptions& options);

/// Promotes residual regions to level-1 detections (root label).
std::vector<Detection> recover(const std::vector<Region>& residual_regions,
                               const std::vector<Detection>& detections,
                               const PredictionMap& map, const RecoveryParams& params,
                               const Taxonomy& taxonomy);

struct FusionTrace {
    std::size_t tiles = 0;
    std::vector<Box> localized;
    std::vector<std::size_t> localized_areas;
    std::vector<IterationTrace> iterations;
    std::vector<Detection> recovered;
    std::size_t residual_regions = 0;
    std::size_t suppressed_final = 0;
};

struct FusionResult {
    std::vector<Detection> detections;
    std::vector<Region> residual_regions;
    BinaryMask residual;
    /// Stitched segmentation map the run was based on.
    PredictionMap segmentation;
    FusionTrace trace;
};

/// Full pipeline. Errors from any step are rethrown as PipelineError with
/// the stage name (segment, stitch, localize, detect, recover).
FusionResult run_pipeline(const SceneImage& image, const SegmentationBackend& seg,
                          const DetectionBackend& det, const FusionOptions& options,
                          const Taxonomy& taxonomy);

/// Tiled segmentation stitched to a full-image map.
PredictionMap segment_image(const SceneImage& image, const SegmentationBackend& seg,
                            const GridParams& grid, unsigned threads = 1);

// Single-model baselines -----------------------------------------------------

/// Each localized region's box as a root-labelled detection scored by its
/// mean foreground probability.
std::vector<Detection> segmentation_only(const PredictionMap& map, const OperatingMode& mode,
                                         const Taxonomy& taxonomy);

/// Detector over the tile grid, thresholded and suppressed.
std::vector<Detection> detection_only(const SceneImage& image, const DetectionBackend& det,
                                      const OperatingMode& mode, const GridParams& grid,
                                      double nms_threshold = kDefaultNmsThreshold);

/// Machine-readable trace of a run.
std::string trace_document(const FusionResult& result, const FusionOptions& options);

}  // namespace aerofuse
