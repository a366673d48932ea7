#pragma once

/// @file raster.hpp
/// @brief Prediction maps, binary masks and connected regions.

#include "aerofuse/geometry.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace aerofuse {

class RasterError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Row-major, channel-interleaved float raster.
class Raster {
public:
    Raster() = default;
    Raster(int width, int height, int channels, float fill = 0.0f);
    Raster(int width, int height, int channels, std::vector<float> values);

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    std::size_t pixel_count() const {
        return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    }

    float at(int x, int y, int c) const { return values_[index(x, y, c)]; }
    float& at(int x, int y, int c) { return values_[index(x, y, c)]; }

    std::span<const float> values() const { return values_; }
    std::span<float> values() { return values_; }

    /// Copy of the rectangle [x0, x0+w) x [y0, y0+h); must lie inside.
    Raster crop(int x0, int y0, int w, int h) const;

    friend bool operator==(const Raster&, const Raster&) = default;

private:
    std::size_t index(int x, int y, int c) const {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                static_cast<std::size_t>(x)) *
                   static_cast<std::size_t>(channels_) +
               static_cast<std::size_t>(c);
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<float> values_;
};

/// Per-pixel class probabilities; channel 0 is background.
class PredictionMap {
public:
    PredictionMap() = default;
    /// Throws RasterError when a value lies outside [0, 1] or channels < 1.
    explicit PredictionMap(Raster raster);

    /// Two-channel (background, aircraft) map from foreground probabilities.
    static PredictionMap from_foreground(int width, int height, std::span<const float> fg);

    int width() const { return raster_.width(); }
    int height() const { return raster_.height(); }
    int channels() const { return raster_.channels(); }
    const Raster& raster() const { return raster_; }

    double foreground(int x, int y) const { return 1.0 - static_cast<double>(raster_.at(x, y, 0)); }
    bool is_normalized(double tolerance = 1e-5) const;

    friend bool operator==(const PredictionMap&, const PredictionMap&) = default;

private:
    Raster raster_;
};

class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int width, int height, bool fill = false);

    int width() const { return width_; }
    int height() const { return height_; }
    bool get(int x, int y) const { return bits_[index(x, y)] != 0; }
    void set(int x, int y, bool v) { bits_[index(x, y)] = v ? 1 : 0; }
    std::size_t count() const;

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
};

/// A connected set of pixels with its tight bounding box.
struct Region {
    std::vector<Pixel> pixels;  // scan order
    Box box;
    double centroid_x = 0.0;
    double centroid_y = 0.0;

    std::size_t area() const { return pixels.size(); }

    /// Builds box and centroid from a pixel list (sorted on the way in).
    static Region from_pixels(std::vector<Pixel> pixels);
};

/// Foreground iff 1 - background >= t.
BinaryMask threshold(const PredictionMap& map, double t);

/// 8-connected components, ordered by their first pixel in scan order.
std::vector<Region> connected_components(const BinaryMask& mask);

std::vector<Region> filter_min_size(std::vector<Region> regions, std::size_t min_size);

/// Clears every pixel whose cell intersects the box interior (clipped).
BinaryMask erase(BinaryMask mask, const Box& box);
void erase_in_place(BinaryMask& mask, const Box& box);

double mean_foreground(const PredictionMap& map, const Region& region);

/// Pixels of `region` still set in `mask`.
std::size_t count_set(const BinaryMask& mask, const Region& region);

}  // namespace aerofuse
