#pragma once

/// @file augment.hpp
/// @brief Deterministic geometric and radiometric augmentations.
///
/// Geometric transforms are exact pixel permutations (flips and quarter
/// turns) so ground-truth footprints can be carried along without
/// resampling.

#include "aerofuse/raster.hpp"
#include "aerofuse/scene.hpp"

namespace aerofuse::augment {

enum class Kind { FlipH, FlipV, Rotate90, Grayscale, HistEqualize, Normalize };

struct Transform {
    Kind kind = Kind::FlipH;
    /// Quarter turns clockwise for Rotate90 (any integer, taken mod 4).
    int quarter_turns = 1;

    bool geometric() const {
        return kind == Kind::FlipH || kind == Kind::FlipV || kind == Kind::Rotate90;
    }
};

inline constexpr int kHistogramLevels = 256;

Raster apply(const Raster& image, const Transform& t);

/// Maps a pixel address through a geometric transform of a width x height
/// image. Identity for radiometric transforms.
Pixel map_pixel(Pixel p, int width, int height, const Transform& t);
Box map_box(const Box& b, int width, int height, const Transform& t);

/// Applies a geometric transform to the manifest's size, boxes and
/// footprints. Radiometric transforms leave it unchanged.
SceneManifest apply(const SceneManifest& scene, const Transform& t);

Raster flip_h(const Raster& image);
Raster flip_v(const Raster& image);
Raster rotate90(const Raster& image, int quarter_turns);
/// Luma (BT.601) for 3 channels, channel mean otherwise; the result keeps
/// the channel count with every channel equal.
Raster grayscale(const Raster& image);
/// Per-channel equalization over kHistogramLevels bins of [0, 1]: each
/// value maps to the empirical CDF of its bin.
Raster hist_equalize(const Raster& image);
/// Per-channel standardization to zero mean and unit variance; constant
/// channels become zero.
Raster normalize(const Raster& image);

}  // namespace aerofuse::augment
