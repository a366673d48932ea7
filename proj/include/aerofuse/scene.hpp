#pragma once

/// @file scene.hpp
/// @brief Ground-truth scene manifests.
///
/// A manifest is line-oriented `key = value` text:
///
///     width = 1024
///     height = 1024
///     resolution_cm = 40
///     image = image.pmap
///     footprints = footprints.pmap
///     object = <id> <x_min> <y_min> <x_max> <y_max> <level-3 label>
///
/// `footprints` is an optional one-channel PMAP whose pixel value is the id
/// of the object covering it (0 = none). Paths are relative to the manifest.

#include "aerofuse/geometry.hpp"
#include "aerofuse/raster.hpp"
#include "aerofuse/taxonomy.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace aerofuse {

class ManifestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kMinResolutionCm = 30.0;
inline constexpr double kMaxResolutionCm = 50.0;

struct GroundTruthObject {
    int id = 0;
    Box box;
    std::string label;  // level-3 name
    /// Footprint pixels; the box's pixels when no footprint raster exists.
    Region footprint;
};

struct SceneManifest {
    int width = 0;
    int height = 0;
    double resolution_cm = 50.0;
    std::string image_path;       // as written in the manifest
    std::string footprints_path;  // may be empty
    std::vector<GroundTruthObject> objects;

    double area_km2() const;
};

/// Parses and validates (bounds, resolution range, labels are level-3 in
/// the taxonomy, unique ids). Footprints default to box pixels.
SceneManifest parse_manifest(std::string_view document, const Taxonomy& taxonomy);
std::string format_manifest(const SceneManifest& manifest);

/// Reads a manifest file and, when referenced, its footprint raster.
SceneManifest load_manifest(const std::string& path, const Taxonomy& taxonomy);
/// Resolves a manifest-relative path against the manifest's directory.
std::string resolve_relative(const std::string& manifest_path, const std::string& relative);

/// Region made of the integer pixels covered by the box (clipped).
Region box_region(const Box& box, int width, int height);

/// Footprint regions from an id raster; object ids map to their pixels.
void assign_footprints(SceneManifest& manifest, const Raster& id_raster);
Raster footprint_raster(const SceneManifest& manifest);

}  // namespace aerofuse
