#include "aerofuse/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace aerofuse::synth {

namespace {

// Stream ids; one per independent source of randomness.
constexpr std::uint64_t kLayoutStream = 1;
constexpr std::uint64_t kImageStream = 2;
constexpr std::uint64_t kSegObjectStream = 10;
constexpr std::uint64_t kSegFalsePositiveStream = 11;
constexpr std::uint64_t kDetObjectStream = 20;
constexpr std::uint64_t kDetFalsePositiveStream = 21;

/// Minimum gap between unpaired aircraft boxes.
constexpr double kAircraftClearance = 14.0;
/// Gap kept between false positives and anything they must not touch.
constexpr double kFalsePositiveClearance = 6.0;
constexpr int kPlacementAttempts = 60;

double uniform(std::mt19937_64& rng, double lo, double hi) {
    if (hi <= lo) return lo;
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    if (hi <= lo) return lo;
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

std::size_t poisson(std::mt19937_64& rng, double mean) {
    if (mean <= 0.0) return 0;
    return static_cast<std::size_t>(std::poisson_distribution<long>(mean)(rng));
}

Box inflate(const Box& b, double d) { return {b.x_min - d, b.y_min - d, b.x_max + d, b.y_max + d}; }

bool overlaps_any(const Box& b, const std::vector<Box>& others) {
    return std::any_of(others.begin(), others.end(),
                       [&](const Box& o) { return intersection_area(b, o) > 0.0; });
}

/// Airframe silhouette inside a box: fuselage, wings and tailplane.
/// heading: 0 nose +x, 1 nose +y, 2 nose -x, 3 nose -y.
std::vector<Pixel> rasterize_aircraft(const Box& box, int heading, double length, double span) {
    std::vector<Pixel> px;
    const double cx = box.center_x();
    const double cy = box.center_y();
    const double fuselage = std::max(1.5, 0.07 * length);
    for (int y = static_cast<int>(box.y_min); y < static_cast<int>(box.y_max); ++y) {
        for (int x = static_cast<int>(box.x_min); x < static_cast<int>(box.x_max); ++x) {
            const double dx = x + 0.5 - cx;
            const double dy = y + 0.5 - cy;
            double u = 0.0, v = 0.0;
            switch (heading) {
                case 0: u = dx; v = dy; break;
                case 1: u = dy; v = dx; break;
                case 2: u = -dx; v = dy; break;
                default: u = -dy; v = dx; break;
            }
            const double av = std::abs(v);
            const bool body = av <= fuselage && std::abs(u) <= 0.5 * length;
            const bool wings = av <= 0.5 * span && u >= -0.10 * length && u <= 0.12 * length;
            const bool tail = av <= 0.22 * span && u >= -0.5 * length && u <= -0.36 * length;
            if (body || wings || tail) px.push_back({x, y});
        }
    }
    return px;
}

void paint(std::vector<float>& fg, int w, int h, int x, int y, float p) {
    if (x < 0 || y < 0 || x >= w || y >= h) return;
    auto& v = fg[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) +
                 static_cast<std::size_t>(x)];
    v = std::max(v, p);
}

/// Paints an axis-aligned ellipse and returns its bounding box.
Box paint_ellipse(std::vector<float>& fg, int w, int h, double cx, double cy, double a, double b,
                  float p) {
    const int x0 = static_cast<int>(std::floor(cx - a));
    const int x1 = static_cast<int>(std::ceil(cx + a));
    const int y0 = static_cast<int>(std::floor(cy - b));
    const int y1 = static_cast<int>(std::ceil(cy + b));
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const double ux = (x + 0.5 - cx) / a;
            const double uy = (y + 0.5 - cy) / b;
            if (ux * ux + uy * uy <= 1.0) paint(fg, w, h, x, y, p);
        }
    }
    return Box{cx - a, cy - b, cx + a, cy + b};
}

double scene_area_km2(const SceneManifest& scene) { return scene.area_km2(); }

}  // namespace

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream_id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream_id),
                      static_cast<std::uint32_t>(stream_id >> 32), 0x61657266u};
    return std::mt19937_64(seq);
}

SceneManifest generate_scene(const SceneParams& params, const Taxonomy& taxonomy) {
    if (params.width <= 0 || params.height <= 0) {
        throw std::invalid_argument("scene size must be positive");
    }
    if (params.min_length < 8 || params.max_length < params.min_length) {
        throw std::invalid_argument("invalid aircraft length range");
    }
    if (params.pair_fraction < 0.0 || params.pair_fraction >= 1.0) {
        throw std::invalid_argument("pair_fraction must be in [0, 1)");
    }
    if (taxonomy.level3().empty()) throw std::invalid_argument("taxonomy has no level-3 labels");

    auto rng = make_stream(params.seed, kLayoutStream);
    SceneManifest scene;
    scene.width = params.width;
    scene.height = params.height;
    scene.resolution_cm = params.resolution_cm;

    const int n_clusters = std::max(1, params.n_clusters);
    const double margin = 0.2 * std::min(params.width, params.height);
    std::vector<std::pair<double, double>> centres;
    for (int c = 0; c < n_clusters; ++c) {
        centres.emplace_back(uniform(rng, margin, params.width - margin),
                             uniform(rng, margin, params.height - margin));
    }

    std::vector<Box> placed;
    const auto& names = taxonomy.level3();
    auto add = [&](const Box& box, int heading, double length, double span) {
        GroundTruthObject o;
        o.id = static_cast<int>(scene.objects.size()) + 1;
        o.footprint = Region::from_pixels(rasterize_aircraft(box, heading, length, span));
        o.box = o.footprint.box;
        o.label = names[static_cast<std::size_t>(
            uniform_int(rng, 0, static_cast<int>(names.size()) - 1))];
        scene.objects.push_back(std::move(o));
        placed.push_back(box);
    };
    auto fits = [&](const Box& b, const Box* sibling) {
        if (b.x_min < 2 || b.y_min < 2 || b.x_max > params.width - 2 ||
            b.y_max > params.height - 2) {
            return false;
        }
        const Box grown = inflate(b, kAircraftClearance);
        for (const Box& o : placed) {
            if (sibling && o == *sibling) continue;
            if (intersection_area(grown, o) > 0.0) return false;
        }
        return true;
    };

    const double pair_event = params.pair_fraction / (2.0 - params.pair_fraction);
    std::normal_distribution<double> jitter(0.0, params.cluster_spread);
    int attempts = 0;
    const int max_attempts = std::max(1, params.n_aircraft) * 400;
    while (static_cast<int>(scene.objects.size()) < params.n_aircraft && attempts++ < max_attempts) {
        const int length = uniform_int(rng, params.min_length, params.max_length);
        const int span = static_cast<int>(std::lround(length * uniform(rng, 0.8, 1.1)));
        const int heading = uniform_int(rng, 0, 3);
        const bool along_x = heading % 2 == 0;
        const int w = along_x ? length : span;
        const int h = along_x ? span : length;
        const auto& centre = centres[static_cast<std::size_t>(uniform_int(rng, 0, n_clusters - 1))];
        const double cx = centre.first + jitter(rng);
        const double cy = centre.second + jitter(rng);
        const bool want_pair = uniform(rng, 0.0, 1.0) < pair_event;
        const int gap = uniform_int(rng, 1, 2);
        const Box box{std::round(cx - w / 2.0), std::round(cy - h / 2.0),
                      std::round(cx - w / 2.0) + w, std::round(cy - h / 2.0) + h};
        if (!fits(box, nullptr)) continue;
        add(box, heading, length, span);

        if (want_pair && static_cast<int>(scene.objects.size()) < params.n_aircraft) {
            // Wingtip to wingtip: offset across the wing axis.
            const Box first = box;
            const Box partner = along_x ? Box{box.x_min, box.y_max + gap, box.x_max,
                                              box.y_max + gap + h}
                                        : Box{box.x_max + gap, box.y_min, box.x_max + gap + w,
                                              box.y_max};
            if (fits(partner, &first)) add(partner, heading, length, span);
        }
    }
    return scene;
}

Raster render_image(const SceneManifest& scene, std::uint64_t seed) {
    auto rng = make_stream(seed, kImageStream);
    Raster img(scene.width, scene.height, 3);
    std::uniform_real_distribution<float> grain(-0.04f, 0.04f);
    for (int y = 0; y < scene.height; ++y) {
        for (int x = 0; x < scene.width; ++x) {
            const float base = 0.35f + 0.05f * std::sin(0.013f * static_cast<float>(x)) *
                                           std::cos(0.011f * static_cast<float>(y));
            const float n = grain(rng);
            img.at(x, y, 0) = std::clamp(base + n, 0.0f, 1.0f);
            img.at(x, y, 1) = std::clamp(base + n + 0.02f, 0.0f, 1.0f);
            img.at(x, y, 2) = std::clamp(base + n - 0.02f, 0.0f, 1.0f);
        }
    }
    for (const auto& o : scene.objects) {
        for (const Pixel& p : o.footprint.pixels) {
            const int sx = p.x + 3, sy = p.y + 3;
            if (sx < scene.width && sy < scene.height) {
                for (int c = 0; c < 3; ++c) img.at(sx, sy, c) *= 0.55f;
            }
        }
    }
    for (const auto& o : scene.objects) {
        for (const Pixel& p : o.footprint.pixels) {
            for (int c = 0; c < 3; ++c) img.at(p.x, p.y, c) = 0.82f + 0.03f * static_cast<float>(c);
        }
    }
    return img;
}

void SyntheticBackendConfig::validate() const {
    auto prob = [](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw std::invalid_argument(std::string(name) + " must be in [0, 1]");
        }
    };
    prob(miss_rate, "miss_rate");
    prob(weak_rate, "weak_rate");
    prob(fp_near_object_fraction, "fp_near_object_fraction");
    prob(label_confusion_rate, "label_confusion_rate");
    prob(confidence_min, "confidence_min");
    prob(confidence_max, "confidence_max");
    prob(weak_confidence_min, "weak_confidence_min");
    prob(weak_confidence_max, "weak_confidence_max");
    if (miss_rate + weak_rate > 1.0) throw std::invalid_argument("miss_rate + weak_rate > 1");
    if (confidence_min > confidence_max || weak_confidence_min > weak_confidence_max) {
        throw std::invalid_argument("confidence ranges must satisfy min <= max");
    }
    if (false_positive_rate < 0.0 || weak_false_positive_rate < 0.0) {
        throw std::invalid_argument("false-positive rates must be non-negative");
    }
    if (localization_jitter < 0.0) throw std::invalid_argument("localization_jitter must be >= 0");
}

SyntheticSegmentation::SyntheticSegmentation(const SceneManifest& scene,
                                             const SyntheticBackendConfig& config)
    : width_(scene.width), height_(scene.height) {
    config.validate();
    foreground_.assign(static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_), 0.0f);
    auto rng = make_stream(config.seed, kSegObjectStream);
    const int dilation = static_cast<int>(std::lround(config.localization_jitter));

    std::vector<Box> occupied;
    for (const auto& o : scene.objects) {
        // Fixed number of draws per object keeps the stream aligned across configs.
        const double u = uniform(rng, 0.0, 1.0);
        const double strong = uniform(rng, config.confidence_min, config.confidence_max);
        const double weak = uniform(rng, config.weak_confidence_min, config.weak_confidence_max);
        occupied.push_back(inflate(o.box, dilation + kFalsePositiveClearance));
        if (u < config.miss_rate) {
            ++missed_;
            continue;
        }
        const auto p = static_cast<float>(u < config.miss_rate + config.weak_rate ? weak : strong);
        for (const Pixel& px : o.footprint.pixels) {
            for (int dy = -dilation; dy <= dilation; ++dy) {
                for (int dx = -dilation; dx <= dilation; ++dx) {
                    paint(foreground_, width_, height_, px.x + dx, px.y + dy, p);
                }
            }
        }
    }

    auto fp_rng = make_stream(config.seed, kSegFalsePositiveStream);
    const double area = scene_area_km2(scene);
    const std::size_t n_strong = poisson(fp_rng, config.false_positive_rate * area);
    const std::size_t n_weak = poisson(fp_rng, config.weak_false_positive_rate * area);
    for (std::size_t i = 0; i < n_strong + n_weak; ++i) {
        const bool is_weak = i >= n_strong;
        const double a = is_weak ? uniform(fp_rng, 7.0, 12.0) : uniform(fp_rng, 12.0, 22.0);
        const double b = is_weak ? uniform(fp_rng, 6.0, 10.0) : uniform(fp_rng, 8.0, 15.0);
        const bool rotated = uniform(fp_rng, 0.0, 1.0) < 0.5;
        const double ax = rotated ? b : a;
        const double ay = rotated ? a : b;
        const double p = is_weak ? uniform(fp_rng, config.weak_confidence_min,
                                           config.weak_confidence_max)
                                 : uniform(fp_rng, config.confidence_min, config.confidence_max);
        const bool near = !is_weak && !scene.objects.empty() &&
                          uniform(fp_rng, 0.0, 1.0) < config.fp_near_object_fraction;
        for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
            double cx = 0.0, cy = 0.0;
            if (near) {
                const auto& o = scene.objects[static_cast<std::size_t>(
                    uniform_int(fp_rng, 0, static_cast<int>(scene.objects.size()) - 1))];
                const double theta = uniform(fp_rng, 0.0, 2.0 * std::numbers::pi);
                const double reach = 0.5 * std::hypot(o.box.width(), o.box.height()) +
                                     uniform(fp_rng, 20.0, 120.0);
                cx = o.box.center_x() + reach * std::cos(theta);
                cy = o.box.center_y() + reach * std::sin(theta);
            } else {
                cx = uniform(fp_rng, ax + 1.0, width_ - ax - 1.0);
                cy = uniform(fp_rng, ay + 1.0, height_ - ay - 1.0);
            }
            const Box extent{cx - ax, cy - ay, cx + ax, cy + ay};
            if (extent.x_min < 0 || extent.y_min < 0 || extent.x_max > width_ ||
                extent.y_max > height_) {
                continue;
            }
            if (overlaps_any(inflate(extent, kFalsePositiveClearance), occupied)) continue;
            occupied.push_back(paint_ellipse(foreground_, width_, height_, cx, cy, ax, ay,
                                             static_cast<float>(p)));
            ++fp_blobs_;
            break;
        }
    }
}

PredictionMap SyntheticSegmentation::segment(const SceneImage&, const PixelRect& tile) const {
    if (tile.x < 0 || tile.y < 0 || tile.x + tile.width > width_ ||
        tile.y + tile.height > height_) {
        throw BackendError("synthetic segmentation: tile " + tile.key() + " outside the scene");
    }
    std::vector<float> crop(static_cast<std::size_t>(tile.width) *
                            static_cast<std::size_t>(tile.height));
    for (int y = 0; y < tile.height; ++y) {
        const auto src = foreground_.begin() +
                         static_cast<std::ptrdiff_t>(static_cast<std::size_t>(tile.y + y) *
                                                         static_cast<std::size_t>(width_) +
                                                     static_cast<std::size_t>(tile.x));
        std::copy(src, src + tile.width,
                  crop.begin() + static_cast<std::ptrdiff_t>(y) * tile.width);
    }
    return PredictionMap::from_foreground(tile.width, tile.height, crop);
}

SyntheticDetection::SyntheticDetection(const SceneManifest& scene,
                                       const SyntheticBackendConfig& config,
                                       const Taxonomy& taxonomy,
                                       const SyntheticSegmentation* seg) {
    config.validate();
    const auto& names = taxonomy.level3();
    if (names.empty()) throw std::invalid_argument("taxonomy has no level-3 labels");
    const int n_names = static_cast<int>(names.size());
    const double W = scene.width;
    const double H = scene.height;
    auto clip = [&](Box b) {
        b.x_min = std::clamp(b.x_min, 0.0, W);
        b.x_max = std::clamp(b.x_max, 0.0, W);
        b.y_min = std::clamp(b.y_min, 0.0, H);
        b.y_max = std::clamp(b.y_max, 0.0, H);
        return b;
    };

    auto rng = make_stream(config.seed, kDetObjectStream);
    const double j = config.localization_jitter;
    std::vector<Box> gt_boxes;
    for (const auto& o : scene.objects) {
        const double u = uniform(rng, 0.0, 1.0);
        const double strong = uniform(rng, config.confidence_min, config.confidence_max);
        const double weak = uniform(rng, config.weak_confidence_min, config.weak_confidence_max);
        double d[4];
        for (double& v : d) v = uniform(rng, -j, j);
        const bool confuse = uniform(rng, 0.0, 1.0) < config.label_confusion_rate;
        const int other = uniform_int(rng, 0, n_names - 2);
        gt_boxes.push_back(inflate(o.box, kFalsePositiveClearance));
        if (u < config.miss_rate) {
            ++missed_;
            continue;
        }
        Detection det;
        det.score = u < config.miss_rate + config.weak_rate ? weak : strong;
        Box b{o.box.x_min + d[0], o.box.y_min + d[1], o.box.x_max + d[2], o.box.y_max + d[3]};
        if (b.x_max - b.x_min < 2.0) b.x_max = b.x_min + 2.0;
        if (b.y_max - b.y_min < 2.0) b.y_max = b.y_min + 2.0;
        det.box = clip(b);
        std::string label = o.label;
        if (confuse && n_names > 1) {
            const int own = static_cast<int>(taxonomy.level3_index(o.label));
            label = names[static_cast<std::size_t>(other >= own ? other + 1 : other)];
        }
        det.label = Label{label, 3};
        detections_.push_back(std::move(det));
    }

    auto fp_rng = make_stream(config.seed, kDetFalsePositiveStream);
    const double area = scene_area_km2(scene);
    const std::size_t n_strong = poisson(fp_rng, config.false_positive_rate * area);
    const std::size_t n_weak = poisson(fp_rng, config.weak_false_positive_rate * area);
    auto touches_seg = [&](const Box& b) {
        if (!seg || !config.disjoint_false_positives) return false;
        const Box g = clip(inflate(b, kFalsePositiveClearance));
        const auto& fg = seg->foreground();
        for (int y = static_cast<int>(g.y_min); y < static_cast<int>(std::ceil(g.y_max)); ++y) {
            for (int x = static_cast<int>(g.x_min); x < static_cast<int>(std::ceil(g.x_max)); ++x) {
                if (fg[static_cast<std::size_t>(y) * static_cast<std::size_t>(seg->width()) +
                       static_cast<std::size_t>(x)] > 0.0f) {
                    return true;
                }
            }
        }
        return false;
    };
    for (std::size_t i = 0; i < n_strong + n_weak; ++i) {
        const bool is_weak = i >= n_strong;
        const double length = uniform(fp_rng, 36.0, 64.0);
        const double span = length * uniform(fp_rng, 0.8, 1.1);
        const bool along_x = uniform(fp_rng, 0.0, 1.0) < 0.5;
        const double w = along_x ? length : span;
        const double h = along_x ? span : length;
        const double score = is_weak ? uniform(fp_rng, config.weak_confidence_min,
                                               config.weak_confidence_max)
                                     : uniform(fp_rng, config.confidence_min, config.confidence_max);
        const auto& label = names[static_cast<std::size_t>(uniform_int(fp_rng, 0, n_names - 1))];
        for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
            const double x0 = uniform(fp_rng, 0.0, std::max(0.0, W - w));
            const double y0 = uniform(fp_rng, 0.0, std::max(0.0, H - h));
            const Box b{x0, y0, std::min(W, x0 + w), std::min(H, y0 + h)};
            if (overlaps_any(b, gt_boxes) || touches_seg(b)) continue;
            detections_.push_back(Detection{b, score, Label{label, 3}});
            ++false_positives_;
            break;
        }
    }
    std::stable_sort(detections_.begin(), detections_.end(), nms_before);
}

std::vector<Detection> SyntheticDetection::detect(const SceneImage&, const PixelRect& window) const {
    return restrict_to_window(detections_, window);
}

SyntheticBackends synthetic_backends(const SceneManifest& scene,
                                     const SyntheticBackendConfig& seg_config,
                                     const SyntheticBackendConfig& det_config,
                                     const Taxonomy& taxonomy) {
    SyntheticBackends b;
    b.segmentation = std::make_shared<SyntheticSegmentation>(scene, seg_config);
    b.detection =
        std::make_shared<SyntheticDetection>(scene, det_config, taxonomy, b.segmentation.get());
    return b;
}

SyntheticBackendConfig calibrated_segmentation(std::uint64_t seed) {
    SyntheticBackendConfig c;
    c.miss_rate = 0.02;
    c.weak_rate = 0.03;
    c.false_positive_rate = 15.0;
    c.weak_false_positive_rate = 40.0;
    c.fp_near_object_fraction = 0.5;
    c.localization_jitter = 1.0;
    c.confidence_min = 0.55;
    c.confidence_max = 0.95;
    c.seed = seed;
    return c;
}

SyntheticBackendConfig calibrated_detection(std::uint64_t seed) {
    SyntheticBackendConfig c;
    c.miss_rate = 0.05;
    c.weak_rate = 0.08;
    c.false_positive_rate = 17.0;
    c.weak_false_positive_rate = 79.0;
    c.label_confusion_rate = 0.2;
    c.localization_jitter = 2.0;
    c.disjoint_false_positives = true;
    c.confidence_min = 0.55;
    c.confidence_max = 0.99;
    c.seed = seed;
    return c;
}

SceneParams calibrated_scene(std::uint64_t seed) {
    SceneParams p;
    p.width = 2048;
    p.height = 2048;
    p.resolution_cm = 40.0;
    p.n_aircraft = 40;
    p.n_clusters = 3;
    p.cluster_spread = 180.0;
    p.pair_fraction = 0.08;
    p.seed = seed;
    return p;
}

}  // namespace aerofuse::synth
