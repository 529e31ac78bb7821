#include "lgp/geometry.hpp"

#include <algorithm>
#include <numeric>

#include "lgp/errors.hpp"

namespace lgp {

double normalize_angle(double theta) {
  constexpr double pi = std::numbers::pi;
  double t = theta - pi * std::floor((theta + pi / 2.0) / pi);
  // floor() can land exactly on the excluded upper end after rounding.
  if (t >= pi / 2.0) t -= pi;
  return t;
}

Box make_hbb(double cx, double cy, double w, double h) {
  Box b{cx, cy, w, h, 0.0, BoxKind::kHbb};
  validate(b);
  return b;
}

Box make_obb(double cx, double cy, double w, double h, double theta) {
  Box b{cx, cy, w, h, normalize_angle(theta), BoxKind::kObb};
  validate(b);
  return b;
}

Box hbb_from_corners(double x1, double y1, double x2, double y2) {
  return make_hbb(0.5 * (x1 + x2), 0.5 * (y1 + y2), x2 - x1, y2 - y1);
}

void validate(const Box& b) {
  if (!std::isfinite(b.cx) || !std::isfinite(b.cy) || !std::isfinite(b.w) ||
      !std::isfinite(b.h) || !std::isfinite(b.theta)) {
    throw InvalidArgument("box has non-finite fields");
  }
  if (!(b.w > 0.0) || !(b.h > 0.0)) {
    throw InvalidArgument("degenerate box: w=" + std::to_string(b.w) +
                          " h=" + std::to_string(b.h));
  }
}

double area(const Box& b) { return b.w * b.h; }

std::array<Point, 4> corners(const Box& b) {
  const auto c = geom::box_corners(to_params(b));
  std::array<Point, 4> out;
  for (int i = 0; i < 4; ++i) out[i] = {c[i].x, c[i].y};
  return out;
}

bool contains(const Box& b, Point p) {
  const double t = b.kind == BoxKind::kObb ? b.theta : 0.0;
  const double dx = p.x - b.cx;
  const double dy = p.y - b.cy;
  const double lx = dx * std::cos(t) + dy * std::sin(t);
  const double ly = -dx * std::sin(t) + dy * std::cos(t);
  return std::abs(lx) <= 0.5 * b.w && std::abs(ly) <= 0.5 * b.h;
}

double smooth_l1(double m, double n) { return geom::smooth_l1(m, n); }

double iou(const Box& a, const Box& b) {
  validate(a);
  validate(b);
  return geom::iou(to_params(a), to_params(b));
}

double center_distance(const Box& a, const Box& b) {
  return geom::center_distance(to_params(a), to_params(b));
}

Box scale_box(const Box& b, double s) {
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw InvalidArgument("scale factor must be positive, got " + std::to_string(s));
  }
  Box out = b;
  out.w = b.w * s;
  out.h = b.h * s;
  return out;
}

std::vector<std::size_t> nms(std::span<const ScoredBox> boxes, double iou_thresh) {
  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return boxes[a].score > boxes[b].score;
  });
  std::vector<std::size_t> kept;
  for (const std::size_t i : order) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](std::size_t k) {
      return iou(boxes[i].box, boxes[k].box) >= iou_thresh;
    });
    if (!suppressed) kept.push_back(i);
  }
  return kept;
}

}  // namespace lgp
