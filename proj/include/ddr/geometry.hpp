#pragma once

#include <algorithm>

namespace ddr {

// Axis-aligned box, top-left origin. Layout code works in page fractions;
// evaluation code uses the same type in pixels.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double right() const { return x + w; }
  double bottom() const { return y + h; }
  double center_x() const { return x + 0.5 * w; }
  double center_y() const { return y + 0.5 * h; }
  double area() const { return w * h; }

  friend bool operator==(const BBox&, const BBox&) = default;
};

inline BBox box_from_center(double cx, double cy, double w, double h) {
  return BBox{cx - 0.5 * w, cy - 0.5 * h, w, h};
}

inline double intersection_area(const BBox& a, const BBox& b) {
  const double iw = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  return iw * ih;
}

// Jaccard index. Degenerate (zero-area) pairs give 0 unless identical.
inline double iou(const BBox& a, const BBox& b) {
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return a == b ? 1.0 : 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

// Boxes that merely share an edge do not overlap.
inline bool overlaps(const BBox& a, const BBox& b) {
  return intersection_area(a, b) > 0.0;
}

// Normalized-box invariant: inside the unit page with positive extent.
inline bool is_valid_normalized(const BBox& b, double tol = 1e-9) {
  return b.w > 0.0 && b.h > 0.0 && b.x >= -tol && b.y >= -tol &&
         b.right() <= 1.0 + tol && b.bottom() <= 1.0 + tol;
}

// Shift (and if necessary shrink) a box so it lies inside [0,1]^2.
inline BBox clamp_to_unit(BBox b) {
  b.w = std::min(b.w, 1.0);
  b.h = std::min(b.h, 1.0);
  b.x = std::clamp(b.x, 0.0, 1.0 - b.w);
  b.y = std::clamp(b.y, 0.0, 1.0 - b.h);
  return b;
}

}  // namespace ddr
