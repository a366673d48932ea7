#include "aerofuse/scene.hpp"

#include "aerofuse/pmap_io.hpp"
#include "aerofuse/text.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace aerofuse {

double SceneManifest::area_km2() const {
    const double metres_per_px = resolution_cm / 100.0;
    return static_cast<double>(width) * static_cast<double>(height) * metres_per_px *
           metres_per_px / 1e6;
}

Region box_region(const Box& box, int width, int height) {
    const int x0 = std::max(0, static_cast<int>(std::floor(box.x_min)));
    const int y0 = std::max(0, static_cast<int>(std::floor(box.y_min)));
    const int x1 = std::min(width, static_cast<int>(std::ceil(box.x_max)));
    const int y1 = std::min(height, static_cast<int>(std::ceil(box.y_max)));
    std::vector<Pixel> px;
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) px.push_back({x, y});
    }
    if (px.empty()) return Region{};
    return Region::from_pixels(std::move(px));
}

SceneManifest parse_manifest(std::string_view document, const Taxonomy& taxonomy) {
    SceneManifest m;
    bool has_width = false, has_height = false;
    std::unordered_set<int> ids;
    const auto lines = text::split_lines(document);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto where = "manifest line " + std::to_string(i + 1) + ": ";
        const auto line = text::strip_comment(lines[i]);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ManifestError(where + "expected 'key = value'");
        const auto key = text::trim(line.substr(0, eq));
        const auto value = text::trim(line.substr(eq + 1));
        if (key == "width" || key == "height") {
            const auto v = text::parse_number<int>(value);
            if (!v || *v <= 0) throw ManifestError(where + "invalid " + std::string(key));
            (key == "width" ? m.width : m.height) = *v;
            (key == "width" ? has_width : has_height) = true;
        } else if (key == "resolution_cm") {
            const auto v = text::parse_number<double>(value);
            if (!v) throw ManifestError(where + "invalid resolution_cm");
            m.resolution_cm = *v;
        } else if (key == "image") {
            m.image_path = std::string(value);
        } else if (key == "footprints") {
            m.footprints_path = std::string(value);
        } else if (key == "object") {
            const auto f = text::split_ws(value);
            if (f.size() != 6) {
                throw ManifestError(where + "expected 'object = id x_min y_min x_max y_max label'");
            }
            GroundTruthObject o;
            const auto id = text::parse_number<int>(f[0]);
            const auto x0 = text::parse_number<double>(f[1]);
            const auto y0 = text::parse_number<double>(f[2]);
            const auto x1 = text::parse_number<double>(f[3]);
            const auto y1 = text::parse_number<double>(f[4]);
            if (!id || !x0 || !y0 || !x1 || !y1) throw ManifestError(where + "malformed object");
            if (*id <= 0 || !ids.insert(*id).second) {
                throw ManifestError(where + "object ids must be positive and unique");
            }
            o.id = *id;
            o.box = Box{*x0, *y0, *x1, *y1};
            o.label = std::string(f[5]);
            if (taxonomy.level_of(o.label) != 3) {
                throw ManifestError(where + "'" + o.label + "' is not a level-3 label");
            }
            m.objects.push_back(std::move(o));
        } else {
            throw ManifestError(where + "unknown key '" + std::string(key) + "'");
        }
    }
    if (!has_width || !has_height) throw ManifestError("manifest must declare width and height");
    if (m.resolution_cm < kMinResolutionCm || m.resolution_cm > kMaxResolutionCm) {
        throw ManifestError("resolution_cm " + text::format_double(m.resolution_cm) +
                            " outside [30, 50]");
    }
    for (auto& o : m.objects) {
        if (!o.box.valid() || o.box.area() <= 0.0 || o.box.x_min < 0 || o.box.y_min < 0 ||
            o.box.x_max > m.width || o.box.y_max > m.height) {
            throw ManifestError("object " + std::to_string(o.id) + " lies outside the image");
        }
        o.footprint = box_region(o.box, m.width, m.height);
    }
    return m;
}

std::string format_manifest(const SceneManifest& m) {
    std::ostringstream os;
    os << "# aerofuse scene manifest\n";
    os << "width = " << m.width << "\n";
    os << "height = " << m.height << "\n";
    os << "resolution_cm = " << text::format_double(m.resolution_cm) << "\n";
    if (!m.image_path.empty()) os << "image = " << m.image_path << "\n";
    if (!m.footprints_path.empty()) os << "footprints = " << m.footprints_path << "\n";
    for (const auto& o : m.objects) {
        os << "object = " << o.id << " " << text::format_double(o.box.x_min) << " "
           << text::format_double(o.box.y_min) << " " << text::format_double(o.box.x_max) << " "
           << text::format_double(o.box.y_max) << " " << o.label << "\n";
    }
    return os.str();
}

std::string resolve_relative(const std::string& manifest_path, const std::string& relative) {
    namespace fs = std::filesystem;
    const fs::path rel(relative);
    if (rel.is_absolute()) return relative;
    return (fs::path(manifest_path).parent_path() / rel).string();
}

void assign_footprints(SceneManifest& manifest, const Raster& id_raster) {
    if (id_raster.width() != manifest.width || id_raster.height() != manifest.height ||
        id_raster.channels() != 1) {
        throw ManifestError("footprint raster must be a one-channel image of the scene size");
    }
    std::unordered_map<int, std::vector<Pixel>> pixels;
    for (int y = 0; y < id_raster.height(); ++y) {
        for (int x = 0; x < id_raster.width(); ++x) {
            const int id = static_cast<int>(id_raster.at(x, y, 0));
            if (id > 0) pixels[id].push_back({x, y});
        }
    }
    for (auto& o : manifest.objects) {
        auto it = pixels.find(o.id);
        if (it == pixels.end()) {
            throw ManifestError("object " + std::to_string(o.id) + " has no footprint pixels");
        }
        o.footprint = Region::from_pixels(std::move(it->second));
    }
}

Raster footprint_raster(const SceneManifest& manifest) {
    Raster r(manifest.width, manifest.height, 1);
    for (const auto& o : manifest.objects) {
        for (const Pixel& p : o.footprint.pixels) r.at(p.x, p.y, 0) = static_cast<float>(o.id);
    }
    return r;
}

SceneManifest load_manifest(const std::string& path, const Taxonomy& taxonomy) {
    SceneManifest m;
    try {
        m = parse_manifest(text::read_file(path), taxonomy);
    } catch (const ManifestError& e) {
        throw ManifestError(path + ": " + e.what());
    }
    if (!m.footprints_path.empty()) {
        assign_footprints(m, pmap::read(resolve_relative(path, m.footprints_path)));
    }
    return m;
}

}  // namespace aerofuse
