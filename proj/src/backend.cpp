#include "aerofuse/backend.hpp"

#include "aerofuse/pmap_io.hpp"
#include "aerofuse/text.hpp"

#include <algorithm>
#include <filesystem>
#include <sstream>

namespace aerofuse {

namespace fs = std::filesystem;

std::vector<Detection> restrict_to_window(const std::vector<Detection>& scene_detections,
                                          const PixelRect& window) {
    const Box w = window.box();
    std::vector<Detection> out;
    for (const auto& d : scene_detections) {
        const double area = d.box.area();
        if (area <= 0.0) continue;
        if (intersection_area(d.box, w) < 0.5 * area) continue;
        Detection clipped = d;
        clipped.box = intersection(d.box, w);
        out.push_back(std::move(clipped));
    }
    std::stable_sort(out.begin(), out.end(), nms_before);
    return out;
}

std::vector<Detection> parse_detections(std::string_view document, const Taxonomy& taxonomy) {
    std::vector<Detection> out;
    const auto lines = text::split_lines(document);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto where = "detection line " + std::to_string(i + 1) + ": ";
        const auto line = text::strip_comment(lines[i]);
        if (line.empty()) continue;
        const auto f = text::split_ws(line);
        if (f.size() != 6) {
            throw BackendError(where + "expected 'x_min y_min x_max y_max score label'");
        }
        double v[5];
        for (int k = 0; k < 5; ++k) {
            const auto parsed = text::parse_number<double>(f[static_cast<std::size_t>(k)]);
            if (!parsed) throw BackendError(where + "malformed number '" + std::string(f[static_cast<std::size_t>(k)]) + "'");
            v[k] = *parsed;
        }
        Detection d;
        d.box = Box{v[0], v[1], v[2], v[3]};
        d.score = v[4];
        if (!d.box.valid()) throw BackendError(where + "invalid box");
        if (!(d.score >= 0.0 && d.score <= 1.0)) {
            throw BackendError(where + "score " + std::string(f[4]) + " outside [0, 1]");
        }
        const std::string name(f[5]);
        const int level = taxonomy.level_of(name);
        if (level == 0) throw BackendError(where + "unknown label '" + name + "'");
        d.label = Label{name, level};
        out.push_back(std::move(d));
    }
    return out;
}

std::string format_detections(const std::vector<Detection>& detections) {
    std::string out;
    for (const auto& d : detections) {
        out += text::format_double(d.box.x_min) + " " + text::format_double(d.box.y_min) + " " +
               text::format_double(d.box.x_max) + " " + text::format_double(d.box.y_max) + " " +
               text::format_double(d.score) + " " + d.label.name + "\n";
    }
    return out;
}

std::vector<Detection> read_detections(const std::string& path, const Taxonomy& taxonomy) {
    try {
        return parse_detections(text::read_file(path), taxonomy);
    } catch (const BackendError& e) {
        throw BackendError(path + ": " + e.what());
    }
}

void write_detections(const std::string& path, const std::vector<Detection>& detections) {
    text::write_file(path, format_detections(detections));
}

namespace {

/// Parses "<x>_<y>" file stems.
std::optional<TileOrigin> parse_key(const std::string& stem) {
    const auto us = stem.find('_');
    if (us == std::string::npos) return std::nullopt;
    const auto x = text::parse_number<int>(std::string_view(stem).substr(0, us));
    const auto y = text::parse_number<int>(std::string_view(stem).substr(us + 1));
    if (!x || !y || *x < 0 || *y < 0) return std::nullopt;
    return TileOrigin{*x, *y};
}

std::vector<fs::path> sorted_entries(const fs::path& dir, const std::string& extension) {
    std::vector<fs::path> out;
    if (!fs::is_directory(dir)) return out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == extension) out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool contains_box(const Box& outer, const Box& inner) {
    return inner.x_min >= outer.x_min && inner.y_min >= outer.y_min &&
           inner.x_max <= outer.x_max && inner.y_max <= outer.y_max;
}

}  // namespace

std::shared_ptr<FileBackend> FileBackend::load(const std::string& directory,
                                               const Taxonomy& taxonomy,
                                               FileBackendOptions options) {
    if (!fs::is_directory(directory)) {
        throw BackendError("backend directory '" + directory + "' does not exist");
    }
    auto backend = std::shared_ptr<FileBackend>(new FileBackend());
    backend->directory_ = directory;
    backend->det_tile_size_ = options.tile_size;

    for (const auto& path : sorted_entries(fs::path(directory) / "tiles", ".pmap")) {
        const auto key = parse_key(path.stem().string());
        if (!key) throw BackendError("unrecognised tile file name '" + path.string() + "'");
        PredictionMap map;
        try {
            map = PredictionMap(pmap::read(path.string()));
        } catch (const RasterError& e) {
            throw BackendError(e.what());
        }
        if (!backend->tiles_.emplace(*key, std::move(map)).second) {
            throw BackendError("key collision: '" + path.string() + "' maps to an existing tile");
        }
    }

    for (const auto& path : sorted_entries(fs::path(directory) / "dets", ".txt")) {
        const auto key = parse_key(path.stem().string());
        if (!key) throw BackendError("unrecognised detection file name '" + path.string() + "'");
        auto local = read_detections(path.string(), taxonomy);
        for (auto& d : local) {
            if (d.label.level != 3) {
                throw BackendError(path.string() + ": detector labels must be level 3, got '" +
                                   d.label.name + "'");
            }
            d.box.x_min += key->x;
            d.box.x_max += key->x;
            d.box.y_min += key->y;
            d.box.y_max += key->y;
        }
        if (!backend->det_tiles_.emplace(*key, std::move(local)).second) {
            throw BackendError("key collision: '" + path.string() + "' maps to an existing tile");
        }
    }

    // Tiles overlap, so one object can be listed by several tiles, clipped
    // differently. Keep the largest copy of each (same label and score,
    // box containing the others).
    std::vector<Detection> all;
    for (const auto& [key, dets] : backend->det_tiles_) all.insert(all.end(), dets.begin(), dets.end());
    std::stable_sort(all.begin(), all.end(), nms_before);
    std::vector<Detection> kept;
    for (auto& d : all) {
        const bool duplicate = std::any_of(kept.begin(), kept.end(), [&](const Detection& k) {
            return k.score == d.score && k.label == d.label && contains_box(k.box, d.box);
        });
        if (!duplicate) kept.push_back(std::move(d));
    }
    backend->scene_detections_ = std::move(kept);
    return backend;
}

PredictionMap FileBackend::segment(const SceneImage&, const PixelRect& tile) const {
    const auto it = tiles_.find(TileOrigin{tile.x, tile.y});
    if (it == tiles_.end()) {
        throw BackendError("missing prediction for tile " + tile.key() + " in '" + directory_ + "'");
    }
    if (it->second.width() != tile.width || it->second.height() != tile.height) {
        throw BackendError("tile " + tile.key() + " in '" + directory_ + "' is " +
                           std::to_string(it->second.width()) + "x" +
                           std::to_string(it->second.height()) + ", expected " +
                           std::to_string(tile.width) + "x" + std::to_string(tile.height));
    }
    return it->second;
}

std::vector<Detection> FileBackend::detect(const SceneImage&, const PixelRect& window) const {
    // The window must be fully covered by stored tile extents.
    const int w = window.width;
    const int h = window.height;
    std::vector<std::uint8_t> covered(static_cast<std::size_t>(std::max(0, w)) *
                                          static_cast<std::size_t>(std::max(0, h)),
                                      0);
    for (const auto& [origin, dets] : det_tiles_) {
        const int x0 = std::max(origin.x, window.x);
        const int y0 = std::max(origin.y, window.y);
        const int x1 = std::min(origin.x + det_tile_size_, window.x + w);
        const int y1 = std::min(origin.y + det_tile_size_, window.y + h);
        for (int y = y0; y < y1; ++y) {
            for (int x = x0; x < x1; ++x) {
                covered[static_cast<std::size_t>(y - window.y) * static_cast<std::size_t>(w) +
                        static_cast<std::size_t>(x - window.x)] = 1;
            }
        }
    }
    if (std::find(covered.begin(), covered.end(), std::uint8_t{0}) != covered.end()) {
        throw BackendError("missing prediction: detection window " + window.key() + " (" +
                           std::to_string(w) + "x" + std::to_string(h) +
                           ") is not covered by tiles in '" + directory_ + "'");
    }
    return restrict_to_window(scene_detections_, window);
}

void export_backend_outputs(const std::string& directory, const SceneImage& image,
                            const TileGrid& grid, const SegmentationBackend* seg,
                            const DetectionBackend* det) {
    const fs::path root(directory);
    if (seg) fs::create_directories(root / "tiles");
    if (det) fs::create_directories(root / "dets");
    for (const auto& o : grid.origins()) {
        const PixelRect rect = grid.rect(o);
        if (seg) {
            pmap::write((root / "tiles" / (rect.key() + ".pmap")).string(),
                        seg->segment(image, rect).raster());
        }
        if (det) {
            auto dets = det->detect(image, rect);
            for (auto& d : dets) {
                d.box.x_min -= o.x;
                d.box.x_max -= o.x;
                d.box.y_min -= o.y;
                d.box.y_max -= o.y;
            }
            write_detections((root / "dets" / (rect.key() + ".txt")).string(), dets);
        }
    }
}

}  // namespace aerofuse
