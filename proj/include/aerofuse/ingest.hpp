#pragma once

/// @file ingest.hpp
/// @brief Tiling with overlap, stitching of tile predictions, dataset counts.

#include "aerofuse/raster.hpp"

#include <optional>
#include <string>
#include <stdexcept>
#include <vector>

namespace aerofuse {

struct SceneManifest;

class IngestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kDefaultTileSize = 512;
inline constexpr int kDefaultTileOverlap = 128;

struct GridParams {
    int tile_size = kDefaultTileSize;
    int overlap = kDefaultTileOverlap;

    int stride() const { return tile_size - overlap; }
};

/// Integer pixel rectangle [x, x+width) x [y, y+height).
struct PixelRect {
    int x = 0;
    int y = 0;
    int width = 0;
    int height = 0;

    Box box() const {
        return Box{static_cast<double>(x), static_cast<double>(y), static_cast<double>(x + width),
                   static_cast<double>(y + height)};
    }
    std::string key() const { return std::to_string(x) + "_" + std::to_string(y); }

    friend bool operator==(const PixelRect&, const PixelRect&) = default;
};

struct TileOrigin {
    int x = 0;
    int y = 0;

    friend bool operator==(const TileOrigin&, const TileOrigin&) = default;
    friend auto operator<=>(const TileOrigin& a, const TileOrigin& b) {
        if (auto c = a.y <=> b.y; c != 0) return c;
        return a.x <=> b.x;
    }
};

/// Tile origins covering an image. Origins sit on multiples of the stride;
/// the last origin per axis is clamped so the tile ends on the image edge.
struct TileGrid {
    int image_width = 0;
    int image_height = 0;
    int tile_size = kDefaultTileSize;
    int overlap = kDefaultTileOverlap;
    std::vector<int> xs;
    std::vector<int> ys;

    /// Row-major (y outer, x inner).
    std::vector<TileOrigin> origins() const;
    /// Tile extent at an origin; narrower than tile_size only when the
    /// image itself is smaller than a tile.
    PixelRect rect(const TileOrigin& origin) const;
    std::size_t size() const { return xs.size() * ys.size(); }
};

/// Throws IngestError when the image is smaller than a tile on either axis
/// or when overlap >= tile_size.
TileGrid make_grid(int image_width, int image_height, GridParams params = {});

/// Like make_grid, but an image smaller than a tile becomes one tile
/// covering the whole image.
TileGrid plan_grid(int image_width, int image_height, GridParams params = {});

/// Axis origins for one dimension (exposed for tests and tools).
std::vector<int> axis_origins(int length, int tile_size, int stride);

struct TilePrediction {
    TileOrigin origin;
    PredictionMap map;
};

enum class BlendMode { Average, Max };

/// Reassembles a full-image map from tile predictions. Every pixel must be
/// covered; overlapping values are averaged (or max-blended) and each
/// pixel of a multi-channel result is renormalized to sum to one.
PredictionMap stitch(const std::vector<TilePrediction>& tiles, int image_width, int image_height,
                     BlendMode mode = BlendMode::Average);

struct DatasetStats {
    std::size_t n_images = 0;
    std::size_t n_objects = 0;
    /// Absent when no grid is given (inference-time sets are not tiled).
    std::optional<std::size_t> n_tiles;
    double area_km2 = 0.0;
};

DatasetStats dataset_stats(const std::vector<SceneManifest>& manifests,
                           std::optional<GridParams> grid = std::nullopt);

}  // namespace aerofuse
