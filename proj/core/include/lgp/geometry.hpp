#pragma once

// Box arithmetic shared by every other module: smooth-L1, axis-aligned and
// rotated IoU, scaling and greedy NMS.
//
// Boxes are always stored in center-size form. Rotated boxes carry an angle
// in [-pi/2, pi/2); the local x axis of a box points along (cos t, sin t) and
// `w` is measured along it.

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "lgp/autodiff.hpp"

namespace lgp {

enum class BoxKind { kHbb, kObb };

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Box {
  double cx = 0.0;
  double cy = 0.0;
  double w = 1.0;
  double h = 1.0;
  double theta = 0.0;
  BoxKind kind = BoxKind::kHbb;

  friend bool operator==(const Box&, const Box&) = default;
};

/// Wraps an angle into [-pi/2, pi/2). A rectangle is invariant under a
/// rotation by pi, so this loses nothing.
double normalize_angle(double theta);

Box make_hbb(double cx, double cy, double w, double h);
Box make_obb(double cx, double cy, double w, double h, double theta);
/// Corner-form [x1, y1, x2, y2] to center-size.
Box hbb_from_corners(double x1, double y1, double x2, double y2);

/// Throws InvalidArgument unless w > 0, h > 0 and all fields are finite.
void validate(const Box& b);

double area(const Box& b);
std::array<Point, 4> corners(const Box& b);
bool contains(const Box& b, Point p);

double smooth_l1(double m, double n);
double iou(const Box& a, const Box& b);
double center_distance(const Box& a, const Box& b);
Box scale_box(const Box& b, double s);

struct ScoredBox {
  Box box;
  double score = 0.0;
};

/// Greedy NMS. Equal scores are visited in ascending input index.
std::vector<std::size_t> nms(std::span<const ScoredBox> boxes, double iou_thresh);

// ---------------------------------------------------------------------------
// Scalar-generic kernels. These are instantiated with `double` for the public
// API above and with ad::Dual for the differentiable loss path.

namespace geom {

template <class T>
struct BoxT {
  T cx, cy, w, h, theta;
};

template <class T>
struct PointT {
  T x, y;
};

template <class T>
T smooth_l1(const T& m, const T& n) {
  using std::abs;
  using ad::abs;
  const T diff = m - n;
  const T a = abs(diff);
  if (ad::value_of(a) < 1.0) return T(0.5) * diff * diff;
  return a - T(0.5);
}

template <class T>
T min_of(const T& a, const T& b) {
  return ad::value_of(a) <= ad::value_of(b) ? a : b;
}
template <class T>
T max_of(const T& a, const T& b) {
  return ad::value_of(a) >= ad::value_of(b) ? a : b;
}

template <class T>
T hbb_iou(const BoxT<T>& a, const BoxT<T>& b) {
  const T iw = min_of(a.cx + T(0.5) * a.w, b.cx + T(0.5) * b.w) -
               max_of(a.cx - T(0.5) * a.w, b.cx - T(0.5) * b.w);
  const T ih = min_of(a.cy + T(0.5) * a.h, b.cy + T(0.5) * b.h) -
               max_of(a.cy - T(0.5) * a.h, b.cy - T(0.5) * b.h);
  if (ad::value_of(iw) <= 0.0 || ad::value_of(ih) <= 0.0) return T(0.0);
  const T inter = iw * ih;
  const T uni = a.w * a.h + b.w * b.h - inter;
  return inter / uni;
}

template <class T>
std::array<PointT<T>, 4> box_corners(const BoxT<T>& b) {
  using std::cos;
  using std::sin;
  using ad::cos;
  using ad::sin;
  const T c = cos(b.theta);
  const T s = sin(b.theta);
  const T hw = T(0.5) * b.w;
  const T hh = T(0.5) * b.h;
  constexpr double sx[4] = {-1.0, 1.0, 1.0, -1.0};
  constexpr double sy[4] = {-1.0, -1.0, 1.0, 1.0};
  std::array<PointT<T>, 4> out;
  for (int i = 0; i < 4; ++i) {
    const T lx = T(sx[i]) * hw;
    const T ly = T(sy[i]) * hh;
    out[i] = {b.cx + lx * c - ly * s, b.cy + lx * s + ly * c};
  }
  return out;
}

template <class T>
T cross(const PointT<T>& o, const PointT<T>& a, const PointT<T>& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

template <class T>
T polygon_area(const std::vector<PointT<T>>& poly) {
  T acc(0.0);
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % n];
    acc += p.x * q.y - q.x * p.y;
  }
  return T(0.5) * acc;
}

/// Sutherland-Hodgman: clip `subject` against every half-plane of the convex,
/// counter-clockwise `clip` polygon.
template <class T>
std::vector<PointT<T>> clip_convex(std::vector<PointT<T>> subject,
                                   const std::array<PointT<T>, 4>& clip) {
  for (std::size_t e = 0; e < clip.size() && !subject.empty(); ++e) {
    const auto& a = clip[e];
    const auto& b = clip[(e + 1) % clip.size()];
    std::vector<PointT<T>> out;
    out.reserve(subject.size() + 2);
    const std::size_t n = subject.size();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& cur = subject[i];
      const auto& prev = subject[(i + n - 1) % n];
      const T dc = cross(a, b, cur);
      const T dp = cross(a, b, prev);
      const bool cur_in = ad::value_of(dc) >= 0.0;
      const bool prev_in = ad::value_of(dp) >= 0.0;
      if (cur_in != prev_in) {
        const T t = dp / (dp - dc);
        out.push_back({prev.x + t * (cur.x - prev.x), prev.y + t * (cur.y - prev.y)});
      }
      if (cur_in) out.push_back(cur);
    }
    subject = std::move(out);
  }
  return subject;
}

template <class T>
T obb_iou(const BoxT<T>& a, const BoxT<T>& b) {
  const auto ca = box_corners(a);
  const auto cb = box_corners(b);
  const auto poly = clip_convex(std::vector<PointT<T>>(ca.begin(), ca.end()), cb);
  if (poly.size() < 3) return T(0.0);
  const T inter = polygon_area(poly);
  if (ad::value_of(inter) <= 0.0) return T(0.0);
  const T uni = a.w * a.h + b.w * b.h - inter;
  return inter / uni;
}

/// Dispatches on the angles: both exactly zero uses the closed form.
template <class T>
T iou(const BoxT<T>& a, const BoxT<T>& b) {
  if (ad::value_of(a.theta) == 0.0 && ad::value_of(b.theta) == 0.0) return hbb_iou(a, b);
  return obb_iou(a, b);
}

template <class T>
T center_distance(const BoxT<T>& a, const BoxT<T>& b) {
  return smooth_l1(a.cx, b.cx) + smooth_l1(a.cy, b.cy);
}

}  // namespace geom

inline geom::BoxT<double> to_params(const Box& b) {
  return {b.cx, b.cy, b.w, b.h, b.kind == BoxKind::kObb ? b.theta : 0.0};
}

}  // namespace lgp
