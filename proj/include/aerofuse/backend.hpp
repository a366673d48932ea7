#pragma once

/// @file backend.hpp
/// @brief Inference backend contracts and the file-exchange backend.
///
/// Models run out of process. A backend directory holds their outputs:
///
///     tiles/<x>_<y>.pmap   segmentation prediction for the tile at (x, y)
///     dets/<x>_<y>.txt     detections for that tile, tile-local coordinates,
///                          one `x_min y_min x_max y_max score label` per line

#include "aerofuse/geometry.hpp"
#include "aerofuse/ingest.hpp"
#include "aerofuse/raster.hpp"
#include "aerofuse/taxonomy.hpp"

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace aerofuse {

class BackendError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The image handed to backends. Pixel data is optional: replaying and
/// simulated backends only need the geometry.
struct SceneImage {
    int width = 0;
    int height = 0;
    const Raster* pixels = nullptr;
};

class SegmentationBackend {
public:
    virtual ~SegmentationBackend() = default;
    /// Per-pixel class probabilities for `tile`, same spatial size.
    virtual PredictionMap segment(const SceneImage& image, const PixelRect& tile) const = 0;
};

class DetectionBackend {
public:
    virtual ~DetectionBackend() = default;
    /// Level-3 labelled detections in image coordinates, clipped to `window`.
    virtual std::vector<Detection> detect(const SceneImage& image,
                                          const PixelRect& window) const = 0;
};

/// Keeps detections with at least half their area inside `window`, clipped
/// to it, in NMS priority order.
std::vector<Detection> restrict_to_window(const std::vector<Detection>& scene_detections,
                                          const PixelRect& window);

// Detection list files ------------------------------------------------------

/// Parses `x_min y_min x_max y_max score label` lines ('#' comments allowed).
/// Rejects scores outside [0, 1], invalid boxes and labels that are not in
/// the taxonomy.
std::vector<Detection> parse_detections(std::string_view document, const Taxonomy& taxonomy);
std::string format_detections(const std::vector<Detection>& detections);
std::vector<Detection> read_detections(const std::string& path, const Taxonomy& taxonomy);
void write_detections(const std::string& path, const std::vector<Detection>& detections);

// File backend --------------------------------------------------------------

struct FileBackendOptions {
    /// Extent of each dets/ tile (PMAP tiles carry their own size).
    int tile_size = kDefaultTileSize;
};

/// Serves precomputed outputs. Everything is read and validated at load,
/// after which the object is immutable and safe for concurrent queries.
class FileBackend final : public SegmentationBackend, public DetectionBackend {
public:
    /// Throws BackendError on a missing directory, malformed PMAP header,
    /// invalid detection file or two files mapping to the same tile key.
    static std::shared_ptr<FileBackend> load(const std::string& directory,
                                             const Taxonomy& taxonomy,
                                             FileBackendOptions options = {});

    PredictionMap segment(const SceneImage& image, const PixelRect& tile) const override;
    /// Answers any window covered by stored tiles: the union of the tile
    /// detections (clipped duplicates of the same object collapse onto the
    /// unclipped copy) restricted to the window.
    std::vector<Detection> detect(const SceneImage& image, const PixelRect& window) const override;

    bool has_segmentation() const { return !tiles_.empty(); }
    bool has_detections() const { return !det_tiles_.empty(); }
    std::size_t tile_count() const { return tiles_.size(); }
    const std::string& directory() const { return directory_; }

private:
    std::string directory_;
    int det_tile_size_ = kDefaultTileSize;
    std::map<TileOrigin, PredictionMap> tiles_;
    std::map<TileOrigin, std::vector<Detection>> det_tiles_;
    /// Image-coordinate detections after collapsing clipped duplicates.
    std::vector<Detection> scene_detections_;
};

/// Writes segmentation tiles and per-tile detections for `grid` from any
/// pair of backends (either may be null) into `directory`.
void export_backend_outputs(const std::string& directory, const SceneImage& image,
                            const TileGrid& grid, const SegmentationBackend* seg,
                            const DetectionBackend* det);

}  // namespace aerofuse
