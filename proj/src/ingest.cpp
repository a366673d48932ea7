#include "aerofuse/ingest.hpp"

#include "aerofuse/scene.hpp"

#include <algorithm>
#include <string>

namespace aerofuse {

std::vector<TileOrigin> TileGrid::origins() const {
    std::vector<TileOrigin> out;
    out.reserve(size());
    for (int y : ys) {
        for (int x : xs) out.push_back({x, y});
    }
    return out;
}

PixelRect TileGrid::rect(const TileOrigin& origin) const {
    return PixelRect{origin.x, origin.y, std::min(tile_size, image_width - origin.x),
                     std::min(tile_size, image_height - origin.y)};
}

std::vector<int> axis_origins(int length, int tile_size, int stride) {
    std::vector<int> out;
    const int last = length - tile_size;
    for (int o = 0; o < last; o += stride) out.push_back(o);
    if (out.empty() || out.back() != last) out.push_back(last);
    return out;
}

TileGrid make_grid(int image_width, int image_height, GridParams params) {
    if (params.tile_size <= 0) throw IngestError("tile size must be positive");
    if (params.overlap < 0) throw IngestError("overlap must be non-negative");
    if (params.overlap >= params.tile_size) {
        throw IngestError("overlap (" + std::to_string(params.overlap) +
                          ") must be smaller than the tile size (" +
                          std::to_string(params.tile_size) + ")");
    }
    if (image_width < params.tile_size || image_height < params.tile_size) {
        throw IngestError("image " + std::to_string(image_width) + "x" +
                          std::to_string(image_height) + " is smaller than the " +
                          std::to_string(params.tile_size) + "-pixel tile");
    }
    TileGrid g;
    g.image_width = image_width;
    g.image_height = image_height;
    g.tile_size = params.tile_size;
    g.overlap = params.overlap;
    g.xs = axis_origins(image_width, params.tile_size, params.stride());
    g.ys = axis_origins(image_height, params.tile_size, params.stride());
    return g;
}

TileGrid plan_grid(int image_width, int image_height, GridParams params) {
    if (image_width <= 0 || image_height <= 0) throw IngestError("image must not be empty");
    if (image_width >= params.tile_size && image_height >= params.tile_size) {
        return make_grid(image_width, image_height, params);
    }
    if (params.overlap < 0 || params.overlap >= params.tile_size) {
        throw IngestError("overlap must be in [0, tile_size)");
    }
    TileGrid g;
    g.image_width = image_width;
    g.image_height = image_height;
    g.tile_size = params.tile_size;
    g.overlap = params.overlap;
    g.xs = image_width >= params.tile_size
               ? axis_origins(image_width, params.tile_size, params.stride())
               : std::vector<int>{0};
    g.ys = image_height >= params.tile_size
               ? axis_origins(image_height, params.tile_size, params.stride())
               : std::vector<int>{0};
    return g;
}

PredictionMap stitch(const std::vector<TilePrediction>& tiles, int image_width, int image_height,
                     BlendMode mode) {
    if (tiles.empty()) throw IngestError("stitch: no tiles");
    const int channels = tiles.front().map.channels();
    const auto n_pixels =
        static_cast<std::size_t>(image_width) * static_cast<std::size_t>(image_height);
    const auto c = static_cast<std::size_t>(channels);
    std::vector<double> acc(n_pixels * c, 0.0);
    std::vector<std::uint32_t> cover(n_pixels, 0);

    for (const auto& tile : tiles) {
        const auto& m = tile.map;
        if (m.channels() != channels) {
            throw IngestError("stitch: channel mismatch (" + std::to_string(m.channels()) +
                              " vs " + std::to_string(channels) + ") at tile " +
                              std::to_string(tile.origin.x) + "_" + std::to_string(tile.origin.y));
        }
        if (tile.origin.x < 0 || tile.origin.y < 0 || tile.origin.x + m.width() > image_width ||
            tile.origin.y + m.height() > image_height) {
            throw IngestError("stitch: tile " + std::to_string(tile.origin.x) + "_" +
                              std::to_string(tile.origin.y) + " lies outside the image");
        }
        const auto src = m.raster().values();
        for (int y = 0; y < m.height(); ++y) {
            for (int x = 0; x < m.width(); ++x) {
                const std::size_t p =
                    static_cast<std::size_t>(tile.origin.y + y) *
                        static_cast<std::size_t>(image_width) +
                    static_cast<std::size_t>(tile.origin.x + x);
                const std::size_t s =
                    (static_cast<std::size_t>(y) * static_cast<std::size_t>(m.width()) +
                     static_cast<std::size_t>(x)) * c;
                for (std::size_t k = 0; k < c; ++k) {
                    const double v = src[s + k];
                    if (mode == BlendMode::Average) {
                        acc[p * c + k] += v;
                    } else if (cover[p] == 0 || v > acc[p * c + k]) {
                        acc[p * c + k] = v;
                    }
                }
                ++cover[p];
            }
        }
    }

    Raster out(image_width, image_height, channels);
    auto dst = out.values();
    for (std::size_t p = 0; p < n_pixels; ++p) {
        if (cover[p] == 0) {
            throw IngestError("stitch: pixel (" + std::to_string(p % image_width) + ", " +
                              std::to_string(p / image_width) + ") is not covered by any tile");
        }
        double sum = 0.0;
        for (std::size_t k = 0; k < c; ++k) {
            if (mode == BlendMode::Average) acc[p * c + k] /= cover[p];
            sum += acc[p * c + k];
        }
        const bool renormalize = channels > 1 && sum > 0.0;
        for (std::size_t k = 0; k < c; ++k) {
            const double v = renormalize ? acc[p * c + k] / sum : acc[p * c + k];
            dst[p * c + k] = static_cast<float>(std::clamp(v, 0.0, 1.0));
        }
    }
    return PredictionMap(std::move(out));
}

DatasetStats dataset_stats(const std::vector<SceneManifest>& manifests,
                           std::optional<GridParams> grid) {
    DatasetStats s;
    if (grid) s.n_tiles = 0;
    for (const auto& m : manifests) {
        ++s.n_images;
        s.n_objects += m.objects.size();
        s.area_km2 += m.area_km2();
        if (grid) {
            *s.n_tiles += plan_grid(m.width, m.height, *grid).size();
        }
    }
    return s;
}

}  // namespace aerofuse
