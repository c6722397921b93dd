#include "reltr/geometry.hpp"

#include <algorithm>
#include <string>

#include "reltr/error.hpp"

namespace reltr {

std::array<double, 5> box_geometry(const Box& box, double image_w,
                                   double image_h) {
  if (!(image_w > 0.0) || !(image_h > 0.0))
    throw ValidationError("box_geometry: image size must be positive");
  if (!(box.x1 < box.x2) || !(box.y1 < box.y2))
    throw ValidationError("box_geometry: degenerate box (" +
                          std::to_string(box.x1) + "," + std::to_string(box.y1) +
                          "," + std::to_string(box.x2) + "," +
                          std::to_string(box.y2) + ")");
  if (box.x1 < 0.0 || box.y1 < 0.0 || box.x2 > image_w || box.y2 > image_h)
    throw ValidationError("box_geometry: box extends outside the image");
  return {box.cx() / image_w, box.cy() / image_h, box.width() / image_w,
          box.height() / image_h, box.area() / (image_w * image_h)};
}

Box union_box(const Box& a, const Box& b) {
  return {std::min(a.x1, b.x1), std::min(a.y1, b.y1), std::max(a.x2, b.x2),
          std::max(a.y2, b.y2)};
}

}  // namespace reltr
