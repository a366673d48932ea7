#include "aerofuse/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace aerofuse {

bool Box::valid() const {
    return std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
           std::isfinite(y_max) && x_min <= x_max && y_min <= y_max;
}

Box intersection(const Box& a, const Box& b) {
    Box r{std::max(a.x_min, b.x_min), std::max(a.y_min, b.y_min), std::min(a.x_max, b.x_max),
          std::min(a.y_max, b.y_max)};
    if (r.x_max < r.x_min) r.x_max = r.x_min;
    if (r.y_max < r.y_min) r.y_max = r.y_min;
    return r;
}

double intersection_area(const Box& a, const Box& b) {
    const double w = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
    const double h = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
    if (w <= 0.0 || h <= 0.0) return 0.0;
    return w * h;
}

double distance_to_box(const Box& b, double x, double y) {
    const double dx = std::max({b.x_min - x, 0.0, x - b.x_max});
    const double dy = std::max({b.y_min - y, 0.0, y - b.y_max});
    return std::hypot(dx, dy);
}

double iou(const Box& a, const Box& b) {
    const double inter = intersection_area(a, b);
    const double uni = a.area() + b.area() - inter;
    if (uni <= 0.0) return 0.0;
    return std::clamp(inter / uni, 0.0, 1.0);
}

bool nms_before(const Detection& a, const Detection& b) {
    if (a.score != b.score) return a.score > b.score;
    const double area_a = a.box.area();
    const double area_b = b.box.area();
    if (area_a != area_b) return area_a > area_b;
    return std::tie(a.box.x_min, a.box.y_min, a.box.x_max, a.box.y_max) <
           std::tie(b.box.x_min, b.box.y_min, b.box.x_max, b.box.y_max);
}

std::vector<Detection> nms(std::vector<Detection> detections, double threshold) {
    std::stable_sort(detections.begin(), detections.end(), nms_before);
    std::vector<Detection> kept;
    kept.reserve(detections.size());
    for (auto& candidate : detections) {
        const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const Detection& k) {
            return iou(k.box, candidate.box) > threshold;
        });
        if (!suppressed) kept.push_back(std::move(candidate));
    }
    return kept;
}

double overlap_over_target(const Box& pred, std::span<const Pixel> target) {
    if (target.empty()) throw std::invalid_argument("overlap_over_target: empty target");
    double covered = 0.0;
    for (const Pixel& p : target) {
        const Box cell{static_cast<double>(p.x), static_cast<double>(p.y),
                       static_cast<double>(p.x) + 1.0, static_cast<double>(p.y) + 1.0};
        covered += intersection_area(pred, cell);
    }
    return std::clamp(covered / static_cast<double>(target.size()), 0.0, 1.0);
}

double overlap_over_target(std::span<const Pixel> pred, std::span<const Pixel> target) {
    if (target.empty()) throw std::invalid_argument("overlap_over_target: empty target");
    std::size_t common = 0;
    auto a = pred.begin();
    auto b = target.begin();
    while (a != pred.end() && b != target.end()) {
        if (*a < *b) {
            ++a;
        } else if (*b < *a) {
            ++b;
        } else {
            ++common;
            ++a;
            ++b;
        }
    }
    return static_cast<double>(common) / static_cast<double>(target.size());
}

}  // namespace aerofuse
