#pragma once

// Independent reference implementations used as test oracles.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <utility>
#include <vector>

#include "lgp/geometry.hpp"
#include "lgp/random.hpp"
#include "lgp/scene.hpp"
#include "lgp/types.hpp"

namespace lgp::oracle {

// Point-in-rotated-rectangle written from the corner polygon rather than the
// local frame used by lgp::contains.
inline bool inside_polygon(const std::array<Point, 4>& c, double x, double y) {
  bool pos = false, neg = false;
  for (int i = 0; i < 4; ++i) {
    const Point& a = c[i];
    const Point& b = c[(i + 1) % 4];
    const double cr = (b.x - a.x) * (y - a.y) - (b.y - a.y) * (x - a.x);
    pos |= cr > 0.0;
    neg |= cr < 0.0;
  }
  return !(pos && neg);
}

/// Monte Carlo IoU: uniform samples over the joint bounding rectangle.
inline double monte_carlo_iou(const Box& a, const Box& b, int samples, std::uint64_t seed) {
  const auto ca = corners(a);
  const auto cb = corners(b);
  double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
  for (const auto* cs : {&ca, &cb}) {
    for (const auto& p : *cs) {
      x0 = std::min(x0, p.x);
      y0 = std::min(y0, p.y);
      x1 = std::max(x1, p.x);
      y1 = std::max(y1, p.y);
    }
  }
  Rng rng(seed);
  long in_a = 0, in_b = 0, in_both = 0;
  for (int i = 0; i < samples; ++i) {
    const double x = rng.uniform(x0, x1);
    const double y = rng.uniform(y0, y1);
    const bool ia = inside_polygon(ca, x, y);
    const bool ib = inside_polygon(cb, x, y);
    in_a += ia;
    in_b += ib;
    in_both += ia && ib;
  }
  const long uni = in_a + in_b - in_both;
  return uni == 0 ? 0.0 : static_cast<double>(in_both) / static_cast<double>(uni);
}

/// Quadratic greedy NMS: repeatedly take the best remaining box (lowest index
/// among equal scores) and drop everything overlapping it.
inline std::vector<std::size_t> brute_force_nms(const std::vector<ScoredBox>& boxes, double thresh) {
  std::vector<bool> alive(boxes.size(), true);
  std::vector<std::size_t> kept;
  for (;;) {
    std::size_t best = boxes.size();
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      if (alive[i] && (best == boxes.size() || boxes[i].score > boxes[best].score)) best = i;
    }
    if (best == boxes.size()) break;
    kept.push_back(best);
    alive[best] = false;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      if (alive[i] && iou(boxes[i].box, boxes[best].box) >= thresh) alive[i] = false;
    }
  }
  return kept;
}

/// Central difference of f along one coordinate of x.
inline double central_difference(const std::function<double(const Image&)>& f, const Image& x,
                                 std::size_t index, double h) {
  Image plus = x;
  Image minus = x;
  plus.data[index] += h;
  minus.data[index] -= h;
  return (f(plus) - f(minus)) / (2.0 * h);
}

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

/// Indices of `count` distinct coordinates drawn uniformly from those whose
/// |grad| is at least `floor_frac` of the largest magnitude.
inline std::vector<std::size_t> sample_support(const Image& grad, int count, double floor_frac,
                                               std::uint64_t seed) {
  double peak = 0.0;
  for (const double g : grad.data) peak = std::max(peak, std::abs(g));
  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (peak > 0.0 && std::abs(grad.data[i]) >= floor_frac * peak) support.push_back(i);
  }
  Rng rng(seed);
  for (std::size_t i = support.size(); i > 1; --i) {
    std::swap(support[i - 1], support[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
  }
  if (support.size() > static_cast<std::size_t>(count)) support.resize(static_cast<std::size_t>(count));
  return support;
}

/// A random scene with independent pixel noise of amplitude `noise` added and
/// clamped back into [0, 1].
inline std::pair<Image, GroundTruthSet> noisy_scene(std::uint64_t seed, double noise) {
  auto [img, gts] = render_scene(random_scene(seed));
  Rng rng(seed * 7919 + 13);
  for (double& v : img.data) v = std::clamp(v + rng.uniform(-noise, noise), 0.0, 1.0);
  return {img, gts};
}

/// Exhaustive maximum-weight one-to-one assignment of rows to columns
/// (rows <= columns), by branch and bound with a row-maximum bound.
inline double best_total_assignment(const std::vector<std::vector<double>>& w) {
  const std::size_t rows = w.size();
  if (rows == 0) return 0.0;
  const std::size_t cols = w[0].size();
  std::vector<bool> used(cols, false);
  double best = -1.0;
  std::vector<double> row_max(rows);
  for (std::size_t r = 0; r < rows; ++r) row_max[r] = *std::max_element(w[r].begin(), w[r].end());
  std::vector<double> suffix(rows + 1, 0.0);
  for (std::size_t r = rows; r-- > 0;) suffix[r] = suffix[r + 1] + row_max[r];
  std::function<void(std::size_t, double)> go = [&](std::size_t r, double acc) {
    if (acc + suffix[r] <= best) return;
    if (r == rows) {
      best = acc;
      return;
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (used[c]) continue;
      used[c] = true;
      go(r + 1, acc + w[r][c]);
      used[c] = false;
    }
  };
  go(0, 0.0);
  return best;
}

}  // namespace lgp::oracle
