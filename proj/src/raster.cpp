#include "aerofuse/raster.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace aerofuse {

Raster::Raster(int width, int height, int channels, float fill)
    : width_(width), height_(height), channels_(channels) {
    if (width < 0 || height < 0 || channels < 0) throw RasterError("negative raster dimension");
    values_.assign(pixel_count() * static_cast<std::size_t>(channels), fill);
}

Raster::Raster(int width, int height, int channels, std::vector<float> values)
    : width_(width), height_(height), channels_(channels), values_(std::move(values)) {
    if (width < 0 || height < 0 || channels < 0) throw RasterError("negative raster dimension");
    if (values_.size() != pixel_count() * static_cast<std::size_t>(channels)) {
        throw RasterError("raster value count does not match dimensions");
    }
}

Raster Raster::crop(int x0, int y0, int w, int h) const {
    if (x0 < 0 || y0 < 0 || w < 0 || h < 0 || x0 + w > width_ || y0 + h > height_) {
        throw RasterError("crop rectangle outside raster");
    }
    Raster out(w, h, channels_);
    const auto row_len = static_cast<std::size_t>(w) * static_cast<std::size_t>(channels_);
    for (int y = 0; y < h; ++y) {
        const auto src = values_.begin() + static_cast<std::ptrdiff_t>(index(x0, y0 + y, 0));
        std::copy(src, src + static_cast<std::ptrdiff_t>(row_len),
                  out.values_.begin() + static_cast<std::ptrdiff_t>(out.index(0, y, 0)));
    }
    return out;
}

PredictionMap::PredictionMap(Raster raster) : raster_(std::move(raster)) {
    if (raster_.channels() < 1) throw RasterError("prediction map needs at least one channel");
    for (float v : raster_.values()) {
        if (!(v >= 0.0f && v <= 1.0f)) {
            throw RasterError("prediction value " + std::to_string(v) + " outside [0, 1]");
        }
    }
}

PredictionMap PredictionMap::from_foreground(int width, int height, std::span<const float> fg) {
    Raster r(width, height, 2);
    if (fg.size() != r.pixel_count()) throw RasterError("foreground size mismatch");
    auto v = r.values();
    for (std::size_t i = 0; i < fg.size(); ++i) {
        v[2 * i] = 1.0f - fg[i];
        v[2 * i + 1] = fg[i];
    }
    return PredictionMap(std::move(r));
}

bool PredictionMap::is_normalized(double tolerance) const {
    const auto v = raster_.values();
    const auto c = static_cast<std::size_t>(raster_.channels());
    for (std::size_t i = 0; i < raster_.pixel_count(); ++i) {
        double sum = 0.0;
        for (std::size_t k = 0; k < c; ++k) sum += v[i * c + k];
        if (std::abs(sum - 1.0) > tolerance) return false;
    }
    return true;
}

BinaryMask::BinaryMask(int width, int height, bool fill) : width_(width), height_(height) {
    if (width < 0 || height < 0) throw RasterError("negative mask dimension");
    bits_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
                 fill ? 1 : 0);
}

std::size_t BinaryMask::count() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

Region Region::from_pixels(std::vector<Pixel> pixels) {
    if (pixels.empty()) throw RasterError("region must contain at least one pixel");
    std::sort(pixels.begin(), pixels.end());
    Region r;
    int x_min = pixels.front().x, x_max = x_min;
    int y_min = pixels.front().y, y_max = y_min;
    double sx = 0.0, sy = 0.0;
    for (const Pixel& p : pixels) {
        x_min = std::min(x_min, p.x);
        x_max = std::max(x_max, p.x);
        y_min = std::min(y_min, p.y);
        y_max = std::max(y_max, p.y);
        sx += p.x + 0.5;
        sy += p.y + 0.5;
    }
    const auto n = static_cast<double>(pixels.size());
    r.box = Box{static_cast<double>(x_min), static_cast<double>(y_min),
                static_cast<double>(x_max + 1), static_cast<double>(y_max + 1)};
    r.centroid_x = sx / n;
    r.centroid_y = sy / n;
    r.pixels = std::move(pixels);
    return r;
}

BinaryMask threshold(const PredictionMap& map, double t) {
    BinaryMask mask(map.width(), map.height());
    for (int y = 0; y < map.height(); ++y) {
        for (int x = 0; x < map.width(); ++x) {
            if (map.foreground(x, y) >= t) mask.set(x, y, true);
        }
    }
    return mask;
}

namespace {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) {
        std::iota(parent_.begin(), parent_.end(), 0u);
    }
    std::uint32_t find(std::uint32_t a) {
        while (parent_[a] != a) {
            parent_[a] = parent_[parent_[a]];
            a = parent_[a];
        }
        return a;
    }
    void unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (b < a) std::swap(a, b);
        parent_[b] = a;
    }

private:
    std::vector<std::uint32_t> parent_;
};

}  // namespace

std::vector<Region> connected_components(const BinaryMask& mask) {
    const int w = mask.width();
    const int h = mask.height();
    constexpr std::uint32_t kNone = 0xFFFFFFFFu;
    std::vector<std::uint32_t> labels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h),
                                      kNone);
    auto at = [w](int x, int y) {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(w) +
               static_cast<std::size_t>(x);
    };

    // First pass: provisional labels, recording equivalences with the
    // already-visited 8-neighbours (W, NW, N, NE).
    std::uint32_t next = 0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> links;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!mask.get(x, y)) continue;
            std::uint32_t label = kNone;
            constexpr int dx[] = {-1, -1, 0, 1};
            constexpr int dy[] = {0, -1, -1, -1};
            for (int k = 0; k < 4; ++k) {
                const int nx = x + dx[k];
                const int ny = y + dy[k];
                if (nx < 0 || ny < 0 || nx >= w) continue;
                const std::uint32_t n = labels[at(nx, ny)];
                if (n == kNone) continue;
                if (label == kNone) {
                    label = n;
                } else if (n != label) {
                    links.emplace_back(label, n);
                }
            }
            if (label == kNone) label = next++;
            labels[at(x, y)] = label;
        }
    }

    DisjointSets sets(next);
    for (const auto& [a, b] : links) sets.unite(a, b);

    // Second pass: resolve roots and number components by first pixel.
    std::vector<std::uint32_t> component_of_root(next, kNone);
    std::vector<std::vector<Pixel>> pixels;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::uint32_t l = labels[at(x, y)];
            if (l == kNone) continue;
            const std::uint32_t root = sets.find(l);
            if (component_of_root[root] == kNone) {
                component_of_root[root] = static_cast<std::uint32_t>(pixels.size());
                pixels.emplace_back();
            }
            pixels[component_of_root[root]].push_back(Pixel{x, y});
        }
    }

    std::vector<Region> regions;
    regions.reserve(pixels.size());
    for (auto& p : pixels) regions.push_back(Region::from_pixels(std::move(p)));
    return regions;
}

std::vector<Region> filter_min_size(std::vector<Region> regions, std::size_t min_size) {
    std::erase_if(regions, [min_size](const Region& r) { return r.area() < min_size; });
    return regions;
}

void erase_in_place(BinaryMask& mask, const Box& box) {
    // A pixel is erased when its cell overlaps the box with positive area.
    if (!(box.width() > 0.0 && box.height() > 0.0)) return;
    const int x0 = std::max(0, static_cast<int>(std::floor(box.x_min)));
    const int y0 = std::max(0, static_cast<int>(std::floor(box.y_min)));
    const int x1 = std::min(mask.width(), static_cast<int>(std::ceil(box.x_max)));
    const int y1 = std::min(mask.height(), static_cast<int>(std::ceil(box.y_max)));
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) mask.set(x, y, false);
    }
}

BinaryMask erase(BinaryMask mask, const Box& box) {
    erase_in_place(mask, box);
    return mask;
}

double mean_foreground(const PredictionMap& map, const Region& region) {
    if (region.pixels.empty()) return 0.0;
    double sum = 0.0;
    for (const Pixel& p : region.pixels) sum += map.foreground(p.x, p.y);
    return sum / static_cast<double>(region.pixels.size());
}

std::size_t count_set(const BinaryMask& mask, const Region& region) {
    std::size_t n = 0;
    for (const Pixel& p : region.pixels) n += mask.get(p.x, p.y) ? 1 : 0;
    return n;
}

}  // namespace aerofuse
