#pragma once

/// @file geometry.hpp
/// @brief Axis-aligned boxes, overlap measures and non-maximum suppression.

#include "aerofuse/taxonomy.hpp"

#include <span>
#include <vector>

namespace aerofuse {

/// Integer pixel address; the pixel occupies [x, x+1) x [y, y+1).
struct Pixel {
    int x = 0;
    int y = 0;

    friend bool operator==(const Pixel&, const Pixel&) = default;
    friend auto operator<=>(const Pixel& a, const Pixel& b) {
        if (auto c = a.y <=> b.y; c != 0) return c;
        return a.x <=> b.x;
    }
};

/// Axis-aligned box in continuous pixel coordinates.
struct Box {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double area() const { return width() * height(); }
    double center_x() const { return 0.5 * (x_min + x_max); }
    double center_y() const { return 0.5 * (y_min + y_max); }
    bool valid() const;
    bool contains(double x, double y) const {
        return x >= x_min && x < x_max && y >= y_min && y < y_max;
    }

    friend bool operator==(const Box&, const Box&) = default;
};

Box intersection(const Box& a, const Box& b);
double intersection_area(const Box& a, const Box& b);
/// Distance from a point to the nearest point of the box; 0 inside.
double distance_to_box(const Box& b, double x, double y);

struct Detection {
    Box box;
    double score = 0.0;
    Label label;

    friend bool operator==(const Detection&, const Detection&) = default;
};

/// Intersection over union; 0 when the union is empty.
double iou(const Box& a, const Box& b);

/// Priority used by NMS: higher score first, then larger area, then
/// lexicographically smaller (x_min, y_min, x_max, y_max).
bool nms_before(const Detection& a, const Detection& b);

inline constexpr double kDefaultNmsThreshold = 0.35;

/// Class-agnostic greedy NMS. Output is ordered by nms_before.
std::vector<Detection> nms(std::vector<Detection> detections,
                           double threshold = kDefaultNmsThreshold);

/// Fraction of the target's pixels covered by the box (fractional pixel
/// coverage for non-integer boxes). Throws on an empty target.
double overlap_over_target(const Box& pred, std::span<const Pixel> target);
/// Fraction of target pixels also present in pred. Both spans must be
/// sorted in scan order (Pixel's ordering).
double overlap_over_target(std::span<const Pixel> pred, std::span<const Pixel> target);

enum class OverlapCriterion { OverTarget, IoU };

}  // namespace aerofuse
