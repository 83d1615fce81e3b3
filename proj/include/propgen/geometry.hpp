#pragma once

#include <algorithm>
#include <array>
#include <cmath>

namespace propgen {

// Axis-aligned box, corner convention (x1, y1, x2, y2), float pixel units.
// A valid box has strictly positive extent on both axes. Frames with
// [x, y, width, height] layout are converted at the I/O boundary.
struct Box {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }

  bool valid() const {
    return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) && std::isfinite(y2) &&
           x2 > x1 && y2 > y1;
  }

  bool operator==(const Box&) const = default;
};

inline Box box_from_xywh(double x, double y, double w, double h) {
  return Box{x, y, x + w, y + h};
}

inline std::array<double, 4> box_to_xywh(const Box& b) {
  return {b.x1, b.y1, b.x2 - b.x1, b.y2 - b.y1};
}

inline double intersection_area(const Box& a, const Box& b) {
  const double w = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double h = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

// Intersection over union; 0 for disjoint boxes.
inline double iou(const Box& a, const Box& b) {
  const double inter = intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

}  // namespace propgen
