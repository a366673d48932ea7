#include "aerofuse/augment.hpp"

#include <algorithm>
#include <cmath>

namespace aerofuse::augment {

namespace {

int turns_mod4(int k) { return ((k % 4) + 4) % 4; }

Raster remap(const Raster& image, const Transform& t) {
    const int w = image.width();
    const int h = image.height();
    const bool swap = t.kind == Kind::Rotate90 && turns_mod4(t.quarter_turns) % 2 == 1;
    Raster out(swap ? h : w, swap ? w : h, image.channels());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const Pixel q = map_pixel({x, y}, w, h, t);
            for (int c = 0; c < image.channels(); ++c) out.at(q.x, q.y, c) = image.at(x, y, c);
        }
    }
    return out;
}

}  // namespace

Pixel map_pixel(Pixel p, int width, int height, const Transform& t) {
    switch (t.kind) {
        case Kind::FlipH: return {width - 1 - p.x, p.y};
        case Kind::FlipV: return {p.x, height - 1 - p.y};
        case Kind::Rotate90:
            switch (turns_mod4(t.quarter_turns)) {
                case 1: return {height - 1 - p.y, p.x};
                case 2: return {width - 1 - p.x, height - 1 - p.y};
                case 3: return {p.y, width - 1 - p.x};
                default: return p;
            }
        default: return p;
    }
}

Box map_box(const Box& b, int width, int height, const Transform& t) {
    const double W = width;
    const double H = height;
    switch (t.kind) {
        case Kind::FlipH: return {W - b.x_max, b.y_min, W - b.x_min, b.y_max};
        case Kind::FlipV: return {b.x_min, H - b.y_max, b.x_max, H - b.y_min};
        case Kind::Rotate90:
            switch (turns_mod4(t.quarter_turns)) {
                case 1: return {H - b.y_max, b.x_min, H - b.y_min, b.x_max};
                case 2: return {W - b.x_max, H - b.y_max, W - b.x_min, H - b.y_min};
                case 3: return {b.y_min, W - b.x_max, b.y_max, W - b.x_min};
                default: return b;
            }
        default: return b;
    }
}

Raster flip_h(const Raster& image) { return remap(image, {Kind::FlipH, 0}); }
Raster flip_v(const Raster& image) { return remap(image, {Kind::FlipV, 0}); }
Raster rotate90(const Raster& image, int quarter_turns) {
    return remap(image, {Kind::Rotate90, quarter_turns});
}

Raster grayscale(const Raster& image) {
    Raster out(image.width(), image.height(), image.channels());
    const int c = image.channels();
    for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) {
            double g = 0.0;
            if (c == 3) {
                g = 0.299 * image.at(x, y, 0) + 0.587 * image.at(x, y, 1) +
                    0.114 * image.at(x, y, 2);
            } else {
                for (int k = 0; k < c; ++k) g += image.at(x, y, k);
                g /= c;
            }
            for (int k = 0; k < c; ++k) out.at(x, y, k) = static_cast<float>(g);
        }
    }
    return out;
}

Raster hist_equalize(const Raster& image) {
    Raster out(image.width(), image.height(), image.channels());
    const std::size_t n = image.pixel_count();
    if (n == 0) return out;
    auto bin_of = [](float v) {
        const double clamped = std::clamp(static_cast<double>(v), 0.0, 1.0);
        return std::min(kHistogramLevels - 1, static_cast<int>(clamped * kHistogramLevels));
    };
    for (int c = 0; c < image.channels(); ++c) {
        std::vector<std::size_t> hist(kHistogramLevels, 0);
        for (int y = 0; y < image.height(); ++y) {
            for (int x = 0; x < image.width(); ++x) ++hist[static_cast<std::size_t>(bin_of(image.at(x, y, c)))];
        }
        std::vector<float> cdf(kHistogramLevels);
        std::size_t running = 0;
        for (int b = 0; b < kHistogramLevels; ++b) {
            running += hist[static_cast<std::size_t>(b)];
            cdf[static_cast<std::size_t>(b)] =
                static_cast<float>(static_cast<double>(running) / static_cast<double>(n));
        }
        for (int y = 0; y < image.height(); ++y) {
            for (int x = 0; x < image.width(); ++x) {
                out.at(x, y, c) = cdf[static_cast<std::size_t>(bin_of(image.at(x, y, c)))];
            }
        }
    }
    return out;
}

Raster normalize(const Raster& image) {
    Raster out(image.width(), image.height(), image.channels());
    const auto n = static_cast<double>(image.pixel_count());
    if (n == 0) return out;
    for (int c = 0; c < image.channels(); ++c) {
        double mean = 0.0;
        for (int y = 0; y < image.height(); ++y) {
            for (int x = 0; x < image.width(); ++x) mean += image.at(x, y, c);
        }
        mean /= n;
        double var = 0.0;
        for (int y = 0; y < image.height(); ++y) {
            for (int x = 0; x < image.width(); ++x) {
                const double d = image.at(x, y, c) - mean;
                var += d * d;
            }
        }
        var /= n;
        const double inv_sd = var > 0.0 ? 1.0 / std::sqrt(var) : 0.0;
        for (int y = 0; y < image.height(); ++y) {
            for (int x = 0; x < image.width(); ++x) {
                out.at(x, y, c) = static_cast<float>((image.at(x, y, c) - mean) * inv_sd);
            }
        }
    }
    return out;
}

Raster apply(const Raster& image, const Transform& t) {
    switch (t.kind) {
        case Kind::FlipH:
        case Kind::FlipV:
        case Kind::Rotate90: return remap(image, t);
        case Kind::Grayscale: return grayscale(image);
        case Kind::HistEqualize: return hist_equalize(image);
        case Kind::Normalize: return normalize(image);
    }
    return image;
}

SceneManifest apply(const SceneManifest& scene, const Transform& t) {
    if (!t.geometric()) return scene;
    SceneManifest out = scene;
    const bool swap = t.kind == Kind::Rotate90 && turns_mod4(t.quarter_turns) % 2 == 1;
    if (swap) std::swap(out.width, out.height);
    for (auto& o : out.objects) {
        o.box = map_box(o.box, scene.width, scene.height, t);
        std::vector<Pixel> px;
        px.reserve(o.footprint.pixels.size());
        for (const Pixel& p : o.footprint.pixels) px.push_back(map_pixel(p, scene.width, scene.height, t));
        if (!px.empty()) o.footprint = Region::from_pixels(std::move(px));
    }
    return out;
}

}  // namespace aerofuse::augment
