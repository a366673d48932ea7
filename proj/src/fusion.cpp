#include "aerofuse/fusion.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace aerofuse {

namespace {

unsigned resolve_threads(unsigned requested) {
    if (requested != 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, n). Exceptions are captured and the one with the
/// lowest index is rethrown, so failures are reported deterministically.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    threads = static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex m;
    std::size_t failed_at = n;
    std::exception_ptr failure;
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(m);
                    if (i < failed_at) {
                        failed_at = i;
                        failure = std::current_exception();
                    }
                }
            }
        });
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

void check_probability(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(std::string(name) + " must be in [0, 1]");
}

/// Cells intersecting the box interior, clipped to the mask.
bool touches(const BinaryMask& mask, const Box& b) {
    const int x0 = std::max(0, static_cast<int>(std::floor(b.x_min)));
    const int y0 = std::max(0, static_cast<int>(std::floor(b.y_min)));
    const int x1 = std::min(mask.width(), static_cast<int>(std::ceil(b.x_max)));
    const int y1 = std::min(mask.height(), static_cast<int>(std::ceil(b.y_max)));
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
            if (mask.get(x, y)) return true;
        }
    }
    return false;
}

BinaryMask region_mask(const std::vector<Region>& regions, int w, int h) {
    BinaryMask m(w, h);
    for (const auto& r : regions) {
        for (const auto& p : r.pixels) m.set(p.x, p.y, true);
    }
    return m;
}

bool passes(const Detection& d, const OperatingMode& mode) {
    return d.score >= mode.det_threshold && d.box.area() >= mode.det_min_size;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

OperatingMode OperatingMode::preset(std::string_view name) {
    OperatingMode m;
    if (name == "balanced") return m;
    if (name == "recall") {
        m.name = "recall";
        m.seg_threshold = 0.3;
        m.seg_min_size = 150.0;
        m.det_threshold = 0.3;
        m.det_min_size = 50.0;
        m.enable_recovery = true;
        return m;
    }
    if (name == "precision") {
        m.name = "precision";
        m.seg_threshold = 0.6;
        m.seg_min_size = 400.0;
        m.det_threshold = 0.6;
        m.det_min_size = 150.0;
        m.enable_recovery = false;
        return m;
    }
    throw std::invalid_argument("unknown mode '" + std::string(name) +
                                "' (expected balanced, recall or precision)");
}

std::vector<std::string> OperatingMode::preset_names() { return {"balanced", "recall", "precision"}; }

void OperatingMode::validate() const {
    check_probability(seg_threshold, "seg_threshold");
    check_probability(det_threshold, "det_threshold");
    if (!(seg_min_size >= 0.0)) throw std::invalid_argument("seg_min_size must be >= 0");
    if (!(det_min_size >= 0.0)) throw std::invalid_argument("det_min_size must be >= 0");
}

void RecoveryParams::validate() const {
    if (!(size_min > 0.0 && size_min <= size_max)) {
        throw std::invalid_argument("recovery size band must satisfy 0 < min <= max");
    }
    if (!(max_distance >= 0.0)) throw std::invalid_argument("recovery max_distance must be >= 0");
    if (!(fallback_min_area > 0.0 && fallback_min_area <= fallback_max_area)) {
        throw std::invalid_argument("recovery fallback band must satisfy 0 < min <= max");
    }
}

void FusionOptions::validate() const {
    mode.validate();
    recovery.validate();
    if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
    if (window < 1) throw std::invalid_argument("window must be >= 1");
    if (!(nms_threshold >= 0.0 && nms_threshold <= 1.0)) {
        throw std::invalid_argument("nms_threshold must be in [0, 1]");
    }
}

std::vector<Region> localize(const PredictionMap& map, const OperatingMode& mode) {
    const auto min_size = static_cast<std::size_t>(std::ceil(mode.seg_min_size));
    return filter_min_size(connected_components(threshold(map, mode.seg_threshold)), min_size);
}

PixelRect detection_window(const Region& region, int min_side, int image_width, int image_height) {
    auto axis = [&](double lo, double hi, int limit) {
        const int a = static_cast<int>(std::floor(lo));
        const int b = static_cast<int>(std::ceil(hi));
        int start = a, end = b;
        if (b - a < min_side) {
            const int grow = min_side - (b - a);
            start = a - grow / 2;
            end = start + min_side;
        }
        start = std::clamp(start, 0, limit);
        end = std::clamp(end, 0, limit);
        return std::pair{start, end};
    };
    const auto [x0, x1] = axis(region.box.x_min, region.box.x_max, image_width);
    const auto [y0, y1] = axis(region.box.y_min, region.box.y_max, image_height);
    return PixelRect{x0, y0, x1 - x0, y1 - y0};
}

DetectionStage detect_iterative(const SceneImage& image, BinaryMask mask,
                                std::vector<Region> regions, const DetectionBackend& det,
                                const FusionOptions& options) {
    options.validate();
    const auto min_size = static_cast<std::size_t>(std::ceil(options.mode.seg_min_size));
    DetectionStage out;
    for (int it = 1; it <= options.max_iter && !regions.empty(); ++it) {
        IterationTrace trace;
        trace.iteration = it;
        trace.regions = regions.size();

        std::vector<std::vector<Detection>> answers(regions.size());
        parallel_for(regions.size(), options.threads, [&](std::size_t i) {
            const PixelRect w = detection_window(regions[i], options.window, image.width, image.height);
            try {
                answers[i] = det.detect(image, w);
            } catch (const std::exception& e) {
                throw BackendError("window " + w.key() + " (" + std::to_string(w.width) + "x" +
                                   std::to_string(w.height) + "): " + e.what());
            }
        });

        const BinaryMask current = region_mask(regions, mask.width(), mask.height());
        std::vector<Detection> candidates;
        for (auto& list : answers) {
            for (auto& d : list) {
                if (passes(d, options.mode) && touches(current, d.box)) candidates.push_back(std::move(d));
            }
        }
        trace.candidates = candidates.size();
        std::stable_sort(candidates.begin(), candidates.end(), nms_before);
        for (auto& c : candidates) {
            const auto clash = [&](const Detection& k) { return iou(k.box, c.box) > options.nms_threshold; };
            if (std::any_of(out.detections.begin(), out.detections.end(), clash)) continue;
            if (std::any_of(trace.added.begin(), trace.added.end(), clash)) continue;
            trace.added.push_back(std::move(c));
        }

        const bool progressed = !trace.added.empty();
        for (const auto& d : trace.added) erase_in_place(mask, d.box);
        out.detections.insert(out.detections.end(), trace.added.begin(), trace.added.end());
        out.iterations.push_back(std::move(trace));
        if (!progressed) break;
        regions = filter_min_size(connected_components(mask), min_size);
    }
    out.residual_regions = filter_min_size(connected_components(mask), min_size);
    out.residual = std::move(mask);
    return out;
}

std::vector<Detection> recover(const std::vector<Region>& residual_regions,
                               const std::vector<Detection>& detections,
                               const PredictionMap& map, const RecoveryParams& params,
                               const Taxonomy& taxonomy) {
    params.validate();
    std::vector<double> areas;
    std::vector<const Detection*> anchors;
    for (const auto& d : detections) {
        if (d.label.level == 3) {
            areas.push_back(d.box.area());
            anchors.push_back(&d);
        }
    }
    const bool fallback = areas.empty();
    double lo = params.fallback_min_area, hi = params.fallback_max_area;
    if (!fallback) {
        const double m = median(areas);
        lo = params.size_min * m;
        hi = params.size_max * m;
    }

    std::vector<Detection> out;
    for (const auto& r : residual_regions) {
        const auto area = static_cast<double>(r.area());
        if (area < lo || area > hi) continue;
        if (!fallback) {
            double nearest = std::numeric_limits<double>::infinity();
            for (const auto* d : anchors) {
                nearest = std::min(nearest, distance_to_box(d->box, r.centroid_x, r.centroid_y));
            }
            if (nearest > params.max_distance) continue;
        }
        out.push_back(Detection{r.box, mean_foreground(map, r), Label{taxonomy.root(), 1}});
    }
    return out;
}

PredictionMap segment_image(const SceneImage& image, const SegmentationBackend& seg,
                            const GridParams& grid, unsigned threads) {
    const TileGrid g = plan_grid(image.width, image.height, grid);
    const auto origins = g.origins();
    std::vector<TilePrediction> tiles(origins.size());
    parallel_for(origins.size(), threads, [&](std::size_t i) {
        const PixelRect rect = g.rect(origins[i]);
        PredictionMap m;
        try {
            m = seg.segment(image, rect);
        } catch (const std::exception& e) {
            throw BackendError("tile " + rect.key() + ": " + e.what());
        }
        if (m.width() != rect.width || m.height() != rect.height) {
            throw BackendError("tile " + rect.key() + ": backend returned " +
                               std::to_string(m.width()) + "x" + std::to_string(m.height()) +
                               ", expected " + std::to_string(rect.width) + "x" +
                               std::to_string(rect.height));
        }
        tiles[i] = TilePrediction{origins[i], std::move(m)};
    });
    return stitch(tiles, image.width, image.height);
}

FusionResult run_pipeline(const SceneImage& image, const SegmentationBackend& seg,
                          const DetectionBackend& det, const FusionOptions& options,
                          const Taxonomy& taxonomy) {
    try {
        options.validate();
    } catch (const std::exception& e) {
        throw PipelineError("config", e.what());
    }
    auto stage = [](const char* name, auto&& fn) {
        try {
            return fn();
        } catch (const PipelineError&) {
            throw;
        } catch (const std::exception& e) {
            throw PipelineError(name, e.what());
        }
    };

    FusionResult result;
    result.trace.tiles = stage("segment", [&] {
        return plan_grid(image.width, image.height, options.grid).size();
    });
    result.segmentation = stage("segment", [&] {
        return segment_image(image, seg, options.grid, options.threads);
    });

    auto [mask, regions] = stage("localize", [&] {
        BinaryMask m = threshold(result.segmentation, options.mode.seg_threshold);
        const auto min_size = static_cast<std::size_t>(std::ceil(options.mode.seg_min_size));
        auto r = filter_min_size(connected_components(m), min_size);
        return std::pair{std::move(m), std::move(r)};
    });
    for (const auto& r : regions) {
        result.trace.localized.push_back(r.box);
        result.trace.localized_areas.push_back(r.area());
    }

    DetectionStage found = stage("detect", [&] {
        return detect_iterative(image, std::move(mask), std::move(regions), det, options);
    });
    result.trace.iterations = found.iterations;

    std::vector<Detection> all = found.detections;
    if (options.mode.enable_recovery) {
        result.trace.recovered = stage("recover", [&] {
            return recover(found.residual_regions, found.detections, result.segmentation,
                           options.recovery, taxonomy);
        });
        all.insert(all.end(), result.trace.recovered.begin(), result.trace.recovered.end());
    }
    const std::size_t before = all.size();
    result.detections = nms(std::move(all), options.nms_threshold);
    result.trace.suppressed_final = before - result.detections.size();
    result.trace.residual_regions = found.residual_regions.size();
    result.residual_regions = std::move(found.residual_regions);
    result.residual = std::move(found.residual);
    return result;
}

std::vector<Detection> segmentation_only(const PredictionMap& map, const OperatingMode& mode,
                                         const Taxonomy& taxonomy) {
    std::vector<Detection> out;
    for (const auto& r : localize(map, mode)) {
        out.push_back(Detection{r.box, mean_foreground(map, r), Label{taxonomy.root(), 1}});
    }
    std::stable_sort(out.begin(), out.end(), nms_before);
    return out;
}

std::vector<Detection> detection_only(const SceneImage& image, const DetectionBackend& det,
                                      const OperatingMode& mode, const GridParams& grid,
                                      double nms_threshold) {
    const TileGrid g = plan_grid(image.width, image.height, grid);
    std::vector<Detection> all;
    for (const auto& o : g.origins()) {
        for (auto& d : det.detect(image, g.rect(o))) {
            if (passes(d, mode)) all.push_back(std::move(d));
        }
    }
    return nms(std::move(all), nms_threshold);
}

namespace {

nlohmann::json box_json(const Box& b) { return {b.x_min, b.y_min, b.x_max, b.y_max}; }

nlohmann::json detection_json(const Detection& d) {
    return {{"box", box_json(d.box)}, {"score", d.score}, {"label", d.label.name},
            {"level", d.label.level}};
}

nlohmann::json detections_json(const std::vector<Detection>& v) {
    auto a = nlohmann::json::array();
    for (const auto& d : v) a.push_back(detection_json(d));
    return a;
}

}  // namespace

std::string trace_document(const FusionResult& result, const FusionOptions& options) {
    nlohmann::json j;
    const auto& m = options.mode;
    j["mode"] = {{"name", m.name},
                 {"seg_threshold", m.seg_threshold},
                 {"seg_min_size", m.seg_min_size},
                 {"det_threshold", m.det_threshold},
                 {"det_min_size", m.det_min_size},
                 {"recovery", m.enable_recovery}};
    j["max_iter"] = options.max_iter;
    j["tiles"] = result.trace.tiles;
    auto localized = nlohmann::json::array();
    for (std::size_t i = 0; i < result.trace.localized.size(); ++i) {
        localized.push_back({{"box", box_json(result.trace.localized[i])},
                             {"area", result.trace.localized_areas[i]}});
    }
    j["localized"] = std::move(localized);
    auto iterations = nlohmann::json::array();
    for (const auto& it : result.trace.iterations) {
        iterations.push_back({{"iteration", it.iteration},
                              {"regions", it.regions},
                              {"candidates", it.candidates},
                              {"added", detections_json(it.added)}});
    }
    j["iterations"] = std::move(iterations);
    j["recovered"] = detections_json(result.trace.recovered);
    j["residual_regions"] = result.trace.residual_regions;
    j["suppressed_final"] = result.trace.suppressed_final;
    j["final_count"] = result.detections.size();
    return j.dump(2) + "\n";
}

}  // namespace aerofuse
