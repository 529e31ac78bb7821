#include "lgp/toy_detector.hpp"

#include <algorithm>
#include <cmath>

#include "lgp/errors.hpp"

namespace lgp {

const std::vector<Color>& toy_palette() {
  static const std::vector<Color> palette = {
      {0.85, 0.15, 0.15},  // red
      {0.15, 0.75, 0.20},  // green
      {0.15, 0.25, 0.85},  // blue
      {0.85, 0.80, 0.15},  // yellow
  };
  return palette;
}

struct ToyDetector::Maps {
  int height = 0;
  int width = 0;
  int classes = 0;
  std::vector<double> match;  // [class][pixel]
  std::vector<double> fg;     // [pixel], soft union of the class responses

  double m(int c, int y, int x) const {
    return match[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  double f(int y, int x) const { return fg[static_cast<std::size_t>(y) * width + x]; }
};

namespace {

// Expected run length E = sum_{k=1..K} prod_{i<k} p_i of a ray whose i-th
// pixel survives with probability p_i.
double ray_length(const std::vector<double>& p) {
  double survive = 1.0;
  double total = 0.0;
  for (const double v : p) {
    survive *= v;
    total += survive;
  }
  return total;
}

// dE/dp_j = (prod_{i<j} p_i) * (1 + p_{j+1} + p_{j+1} p_{j+2} + ...).
std::vector<double> ray_length_grad(const std::vector<double>& p) {
  const std::size_t k = p.size();
  std::vector<double> tail(k, 1.0);
  for (std::size_t j = k - 1; j-- > 0;) tail[j] = 1.0 + p[j + 1] * tail[j + 1];
  std::vector<double> g(k);
  double prefix = 1.0;
  for (std::size_t j = 0; j < k; ++j) {
    g[j] = prefix * tail[j];
    prefix *= p[j];
  }
  return g;
}

enum class Dir { kRight, kLeft, kDown, kUp };

struct RayGeom {
  int ax;
  int ay;
};

}  // namespace

ToyDetector::ToyDetector(ToyDetectorOptions options) : opt_(std::move(options)) {
  if (opt_.colors.empty()) throw InvalidArgument("toy detector needs at least one class color");
  if (opt_.stride < 2 || opt_.score_half < 1 || opt_.band_half < 1 || opt_.max_ray < 1) {
    throw InvalidArgument("toy detector window sizes must be positive");
  }
}

std::string ToyDetector::name() const { return opt_.background_logit ? "toy" : "toy-nobg"; }

DetectorMeta ToyDetector::meta() const {
  const int c = static_cast<int>(opt_.colors.size());
  return DetectorMeta{opt_.background_logit, BoxKind::kHbb, c, c};
}

int ToyDetector::num_anchors(int height, int width) const {
  return (height / opt_.stride) * (width / opt_.stride);
}

Point ToyDetector::anchor_center(int index, int width) const {
  const int nx = width / opt_.stride;
  const int ix = index % nx;
  const int iy = index / nx;
  return {static_cast<double>(ix * opt_.stride + opt_.stride / 2),
          static_cast<double>(iy * opt_.stride + opt_.stride / 2)};
}

double ToyDetector::receptive_radius() const {
  return static_cast<double>(std::max({opt_.max_ray, opt_.score_half, opt_.band_half}));
}

ToyDetector::Maps ToyDetector::compute_maps(const Image& image) const {
  Maps maps;
  maps.height = image.height;
  maps.width = image.width;
  maps.classes = static_cast<int>(opt_.colors.size());
  const std::size_t n = static_cast<std::size_t>(image.height) * image.width;
  maps.match.assign(n * maps.classes, 0.0);
  maps.fg.assign(n, 0.0);
  const double inv = 1.0 / (2.0 * opt_.sigma * opt_.sigma);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * image.width + x;
      double miss = 1.0;
      for (int c = 0; c < maps.classes; ++c) {
        double d2 = 0.0;
        for (int ch = 0; ch < 3; ++ch) {
          const double diff = image.at(y, x, ch) - opt_.colors[c][ch];
          d2 += diff * diff;
        }
        const double q = d2 * inv;
        const double m = std::exp(-q * q);
        maps.match[static_cast<std::size_t>(c) * n + p] = m;
        miss *= 1.0 - m;
      }
      maps.fg[p] = 1.0 - miss;
    }
  }
  return maps;
}

namespace {

// Band-averaged foreground mass met by the j-th step of a ray.
struct RaySampler {
  const int height;
  const int width;
  const int band_half;

  // Pixel coordinates of the j-th ray step: the column (row) index for
  // horizontal (vertical) rays.
  static int step_coord(Dir d, const RayGeom& g, int j) {
    switch (d) {
      case Dir::kRight: return g.ax + j;
      case Dir::kLeft: return g.ax - 1 - j;
      case Dir::kDown: return g.ay + j;
      case Dir::kUp: return g.ay - 1 - j;
    }
    return 0;
  }
  static bool horizontal(Dir d) { return d == Dir::kRight || d == Dir::kLeft; }

  template <class Fn>
  void for_band(Dir d, const RayGeom& g, int j, Fn&& fn) const {
    const int s = step_coord(d, g, j);
    if (horizontal(d)) {
      if (s < 0 || s >= width) return;
      for (int y = g.ay - band_half; y < g.ay + band_half; ++y) {
        if (y >= 0 && y < height) fn(y, s);
      }
    } else {
      if (s < 0 || s >= height) return;
      for (int x = g.ax - band_half; x < g.ax + band_half; ++x) {
        if (x >= 0 && x < width) fn(s, x);
      }
    }
  }
};

}  // namespace

ProposalSet ToyDetector::detect_raw(const Image& image) const {
  const Maps maps = compute_maps(image);
  const int nx = image.width / opt_.stride;
  const int ny = image.height / opt_.stride;
  const int classes = maps.classes;
  const DetectorMeta md = meta();
  const double win_norm = 1.0 / (4.0 * opt_.score_half * opt_.score_half);
  const double band_norm = 1.0 / (2.0 * opt_.band_half);
  const RaySampler sampler{image.height, image.width, opt_.band_half};

  ProposalSet out;
  out.reserve(static_cast<std::size_t>(nx) * ny);
  std::vector<double> s(classes);
  std::vector<double> prof(opt_.max_ray);
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const RayGeom g{ix * opt_.stride + opt_.stride / 2, iy * opt_.stride + opt_.stride / 2};
      std::fill(s.begin(), s.end(), 0.0);
      double s_fg = 0.0;
      for (int y = g.ay - opt_.score_half; y < g.ay + opt_.score_half; ++y) {
        for (int x = g.ax - opt_.score_half; x < g.ax + opt_.score_half; ++x) {
          if (y < 0 || y >= image.height || x < 0 || x >= image.width) continue;
          for (int c = 0; c < classes; ++c) s[c] += maps.m(c, y, x);
          s_fg += maps.f(y, x);
        }
      }
      std::vector<double> logits(classes + 1);
      for (int c = 0; c < classes; ++c) logits[c] = opt_.kappa * (s[c] * win_norm - opt_.threshold);
      logits[classes] = opt_.background_logit ? opt_.kappa * (opt_.threshold - s_fg * win_norm) : 0.0;

      double ext[4];
      for (int d = 0; d < 4; ++d) {
        for (int j = 0; j < opt_.max_ray; ++j) {
          double acc = 0.0;
          sampler.for_band(static_cast<Dir>(d), g, j, [&](int y, int x) { acc += maps.f(y, x); });
          prof[j] = acc * band_norm;
        }
        ext[d] = ray_length(prof);
      }
      const double ex = ext[0] + ext[1];
      const double ey = ext[2] + ext[3];
      const double e2 = opt_.min_extent * opt_.min_extent;
      const Box box{g.ax + 0.5 * (ext[0] - ext[1]), g.ay + 0.5 * (ext[2] - ext[3]),
                    std::sqrt(ex * ex + e2), std::sqrt(ey * ey + e2), 0.0, BoxKind::kHbb};
      out.push_back(make_proposal(box, std::move(logits), md));
    }
  }
  return out;
}

Image ToyDetector::backward(const Image& image, const std::vector<ProposalGrad>& grads) const {
  Image result(image.height, image.width, 0.0);
  if (grads.empty()) return result;
  const int nx = image.width / opt_.stride;
  const int ny = image.height / opt_.stride;
  if (grads.size() != static_cast<std::size_t>(nx) * ny) {
    throw DetectorError(name(), "gradient count does not match the anchor grid");
  }
  const Maps maps = compute_maps(image);
  const int classes = maps.classes;
  const std::size_t npix = static_cast<std::size_t>(image.height) * image.width;
  const double win_norm = 1.0 / (4.0 * opt_.score_half * opt_.score_half);
  const double band_norm = 1.0 / (2.0 * opt_.band_half);
  const RaySampler sampler{image.height, image.width, opt_.band_half};

  std::vector<double> g_match(npix * classes, 0.0);
  std::vector<double> g_fg(npix, 0.0);
  std::vector<double> prof(opt_.max_ray);

  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const ProposalGrad& pg = grads[static_cast<std::size_t>(iy) * nx + ix];
      if (pg.is_zero()) continue;
      const RayGeom g{ix * opt_.stride + opt_.stride / 2, iy * opt_.stride + opt_.stride / 2};

      // Class scores.
      if (!pg.logits.empty()) {
        if (pg.logits.size() != static_cast<std::size_t>(classes + 1)) {
          throw DetectorError(name(), "logit gradient has the wrong length");
        }
        const double bg = opt_.background_logit ? -opt_.kappa * pg.logits[classes] : 0.0;
        for (int y = g.ay - opt_.score_half; y < g.ay + opt_.score_half; ++y) {
          for (int x = g.ax - opt_.score_half; x < g.ax + opt_.score_half; ++x) {
            if (y < 0 || y >= image.height || x < 0 || x >= image.width) continue;
            const std::size_t p = static_cast<std::size_t>(y) * image.width + x;
            for (int c = 0; c < classes; ++c) {
              g_match[static_cast<std::size_t>(c) * npix + p] += opt_.kappa * pg.logits[c] * win_norm;
            }
            g_fg[p] += bg * win_norm;
          }
        }
      }

      // Box regression.
      if (pg.cx == 0.0 && pg.cy == 0.0 && pg.w == 0.0 && pg.h == 0.0) continue;
      double ext[4];
      std::vector<double> dext[4];
      for (int d = 0; d < 4; ++d) {
        for (int j = 0; j < opt_.max_ray; ++j) {
          double acc = 0.0;
          sampler.for_band(static_cast<Dir>(d), g, j, [&](int y, int x) { acc += maps.f(y, x); });
          prof[j] = acc * band_norm;
        }
        ext[d] = ray_length(prof);
        dext[d] = ray_length_grad(prof);
      }
      const double e2 = opt_.min_extent * opt_.min_extent;
      const double ex = ext[0] + ext[1];
      const double ey = ext[2] + ext[3];
      const double dw = ex / std::sqrt(ex * ex + e2);
      const double dh = ey / std::sqrt(ey * ey + e2);
      const double g_ext[4] = {0.5 * pg.cx + pg.w * dw, -0.5 * pg.cx + pg.w * dw,
                               0.5 * pg.cy + pg.h * dh, -0.5 * pg.cy + pg.h * dh};
      for (int d = 0; d < 4; ++d) {
        if (g_ext[d] == 0.0) continue;
        for (int j = 0; j < opt_.max_ray; ++j) {
          const double gp = g_ext[d] * dext[d][j] * band_norm;
          if (gp == 0.0) continue;
          sampler.for_band(static_cast<Dir>(d), g, j, [&](int y, int x) {
            g_fg[static_cast<std::size_t>(y) * image.width + x] += gp;
          });
        }
      }
    }
  }

  // Through the soft union and the per-class color responses.
  const double inv = 1.0 / (2.0 * opt_.sigma * opt_.sigma);
  std::vector<double> miss_other(classes);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * image.width + x;
      for (int c = 0; c < classes; ++c) {
        double prod = 1.0;
        for (int o = 0; o < classes; ++o) {
          if (o != c) prod *= 1.0 - maps.m(o, y, x);
        }
        miss_other[c] = prod;
      }
      for (int c = 0; c < classes; ++c) {
        const double gm = g_match[static_cast<std::size_t>(c) * npix + p] + g_fg[p] * miss_other[c];
        if (gm == 0.0) continue;
        const double m = maps.m(c, y, x);
        double d2 = 0.0;
        for (int ch = 0; ch < 3; ++ch) {
          const double diff = image.at(y, x, ch) - opt_.colors[c][ch];
          d2 += diff * diff;
        }
        const double q = d2 * inv;
        // dm/dx = -2 q m * dq/dx, dq/dx = 2 (x - mu) * inv
        const double scale = gm * (-2.0 * q * m) * 2.0 * inv;
        for (int ch = 0; ch < 3; ++ch) {
          result.at(y, x, ch) += scale * (image.at(y, x, ch) - opt_.colors[c][ch]);
        }
      }
    }
  }
  return result;
}

}  // namespace lgp
