#pragma once

#include <array>
#include <cstddef>

namespace reltr {

// Axis-aligned box in pixel coordinates, x growing right, y growing down.
struct Box {
  double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  double cx() const { return 0.5 * (x1 + x2); }
  double cy() const { return 0.5 * (y1 + y2); }
};

// Normalized 5-vector (cx/W, cy/H, w/W, h/H, area/(W*H)); throws
// ValidationError for degenerate boxes or boxes outside the image.
std::array<double, 5> box_geometry(const Box& box, double image_w,
                                   double image_h);

// Smallest box containing both inputs.
Box union_box(const Box& a, const Box& b);

}  // namespace reltr
