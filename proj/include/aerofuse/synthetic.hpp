#pragma once

/// @file synthetic.hpp
/// @brief Synthetic airfield scenes and test-double backends with
/// controllable error rates.
///
/// Everything here is a pure function of its parameters and seed. Separate
/// random streams are derived from the seed for scene layout, segmentation
/// noise and detection noise, so changing one model's noise never moves the
/// other's.

#include "aerofuse/backend.hpp"
#include "aerofuse/scene.hpp"
#include "aerofuse/taxonomy.hpp"

#include <cstdint>
#include <memory>
#include <random>

namespace aerofuse::synth {

/// Deterministic generator for an independent stream of a seed.
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream_id);

struct SceneParams {
    int width = 1024;
    int height = 1024;
    double resolution_cm = 40.0;
    int n_aircraft = 25;
    /// Parking areas the aircraft are grouped around.
    int n_clusters = 2;
    /// Standard deviation (px) of aircraft positions around a cluster centre.
    double cluster_spread = 160.0;
    /// Fraction of aircraft parked wingtip to wingtip with a neighbour
    /// (1-2 px apart), which segmentation tends to merge.
    double pair_fraction = 0.0;
    /// Nose-to-tail length range in pixels.
    int min_length = 36;
    int max_length = 64;
    std::uint64_t seed = 1;
};

/// Manifest with footprints (ids 1..n) for a freshly laid out scene. Fewer
/// than n_aircraft objects are placed only when the image is too crowded.
SceneManifest generate_scene(const SceneParams& params, const Taxonomy& taxonomy);

/// Three-channel image in [0, 1]: textured ground, bright airframes with
/// a shadow offset. Only used for file outputs and augmentation demos.
Raster render_image(const SceneManifest& scene, std::uint64_t seed);

/// Noise model for one synthetic backend. Fields that do not apply to a
/// backend are ignored by it (noted per field).
struct SyntheticBackendConfig {
    /// Probability that an object produces no output at all.
    double miss_rate = 0.0;
    /// Probability that an object is only produced with low confidence
    /// (inside weak_confidence), visible to low-threshold operating modes.
    double weak_rate = 0.0;
    /// Confident false positives per km².
    double false_positive_rate = 0.0;
    /// Low-confidence false positives per km². Segmentation paints them as
    /// small blobs.
    double weak_false_positive_rate = 0.0;
    /// Segmentation only: share of confident false-positive blobs placed in
    /// the neighbourhood of aircraft (vehicles, shelters) rather than
    /// uniformly over the image.
    double fp_near_object_fraction = 0.0;
    /// Detection only: probability of reporting a different level-3 label.
    double label_confusion_rate = 0.0;
    /// Detection: uniform per-coordinate box jitter in pixels.
    /// Segmentation: footprint dilation radius in pixels (rounded).
    double localization_jitter = 0.0;
    /// Detection only: keep false-positive boxes away from every pixel the
    /// segmentation double paints.
    bool disjoint_false_positives = true;
    double confidence_min = 0.9;
    double confidence_max = 0.9;
    double weak_confidence_min = 0.32;
    double weak_confidence_max = 0.48;
    std::uint64_t seed = 1;

    /// Throws std::invalid_argument when a rate or range is out of domain.
    void validate() const;
};

/// Segmentation double: paints footprints at per-object confidence,
/// optionally dilated, plus false-positive ellipses.
class SyntheticSegmentation final : public SegmentationBackend {
public:
    SyntheticSegmentation(const SceneManifest& scene, const SyntheticBackendConfig& config);

    PredictionMap segment(const SceneImage& image, const PixelRect& tile) const override;

    /// Full-scene foreground probability, row-major.
    const std::vector<float>& foreground() const { return foreground_; }
    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t missed_objects() const { return missed_; }
    std::size_t false_positive_blobs() const { return fp_blobs_; }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<float> foreground_;
    std::size_t missed_ = 0;
    std::size_t fp_blobs_ = 0;
};

/// Detection double: one scene-level detection list, answered per window.
class SyntheticDetection final : public DetectionBackend {
public:
    /// `seg` (may be null) is consulted to keep false positives disjoint
    /// from the segmentation double's positives.
    SyntheticDetection(const SceneManifest& scene, const SyntheticBackendConfig& config,
                       const Taxonomy& taxonomy, const SyntheticSegmentation* seg);

    std::vector<Detection> detect(const SceneImage& image, const PixelRect& window) const override;

    const std::vector<Detection>& scene_detections() const { return detections_; }
    std::size_t missed_objects() const { return missed_; }
    std::size_t false_positives() const { return false_positives_; }

private:
    std::vector<Detection> detections_;
    std::size_t missed_ = 0;
    std::size_t false_positives_ = 0;
};

struct SyntheticBackends {
    std::shared_ptr<SyntheticSegmentation> segmentation;
    std::shared_ptr<SyntheticDetection> detection;
};

SyntheticBackends synthetic_backends(const SceneManifest& scene,
                                     const SyntheticBackendConfig& seg_config,
                                     const SyntheticBackendConfig& det_config,
                                     const Taxonomy& taxonomy);

/// Noise presets reproducing the balanced/recall operating points of the
/// reference segmentation and detection models on airfield scenes.
SyntheticBackendConfig calibrated_segmentation(std::uint64_t seed);
SyntheticBackendConfig calibrated_detection(std::uint64_t seed);
/// Scene layout matching the calibrated presets.
SceneParams calibrated_scene(std::uint64_t seed);

}  // namespace aerofuse::synth
