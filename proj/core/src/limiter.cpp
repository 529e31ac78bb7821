#include "lgp/limiter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lgp/errors.hpp"

namespace lgp {

namespace {

void check_shapes(const Image& x, const Image& x_adv, const Heatmap& heat, const FgBgMask& mask) {
  if (!x.same_shape(x_adv) || heat.height != x.height || heat.width != x.width ||
      mask.height != x.height || mask.width != x.width) {
    throw InvalidArgument("imperceptibility inputs have mismatched shapes");
  }
}

}  // namespace

double heat_weight(Point p, const GroundTruthSet& failed_gts, double delta, double eta) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& g : failed_gts) {
    if (!contains(scale_box(g.box, delta), p)) continue;
    const double dx = p.x - g.box.cx;
    const double dy = p.y - g.box.cy;
    const double r = std::sqrt((dx * dx + dy * dy) / (g.box.w * g.box.w + g.box.h * g.box.h));
    best = std::min(best, r);
  }
  return eta * (std::isfinite(best) ? best : 1.0);
}

Heatmap build_heatmap(const GroundTruthSet& failed_gts, int height, int width, double delta,
                      double eta) {
  if (!(delta > 0.0) || !(eta > 0.0)) throw InvalidArgument("heatmap needs delta > 0 and eta > 0");
  Heatmap h{height, width, eta, delta, std::vector<double>(static_cast<std::size_t>(height) * width)};
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      h.weights[static_cast<std::size_t>(y) * width + x] =
          heat_weight({x + 0.5, y + 0.5}, failed_gts, delta, eta);
    }
  }
  return h;
}

FgBgMask build_mask(const GroundTruthSet& failed_gts, int height, int width, double delta) {
  FgBgMask m{height, width, std::vector<std::uint8_t>(static_cast<std::size_t>(height) * width, 0)};
  std::vector<Box> scaled;
  for (const auto& g : failed_gts) scaled.push_back(scale_box(g.box, delta));
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const Point p{x + 0.5, y + 0.5};
      const bool in = std::any_of(scaled.begin(), scaled.end(), [&](const Box& b) { return contains(b, p); });
      m.fg[static_cast<std::size_t>(y) * width + x] = in ? 1 : 0;
    }
  }
  return m;
}

Heatmap uniform_heatmap(int height, int width, double eta) {
  return {height, width, eta, 0.0, std::vector<double>(static_cast<std::size_t>(height) * width, eta)};
}

FgBgMask background_mask(int height, int width) {
  return {height, width, std::vector<std::uint8_t>(static_cast<std::size_t>(height) * width, 0)};
}

bool object_hidden(const TargetSet& t_i, const GroundTruthObject& gt, double score_min,
                   const DetectorMeta& meta) {
  const auto recs = t_i.records_for(gt.id);
  if (recs.empty()) return false;
  return std::all_of(recs.begin(), recs.end(), [&](const TargetRecord* r) {
    const Proposal& p = r->current;
    return p.label == meta.null_label || p.score < score_min || iou(p.box, gt.box) < 0.1;
  });
}

FailedSet update_failed_set(const TargetSet& t_i, const GroundTruthSet& gts, double score_min,
                            const DetectorMeta& meta) {
  FailedSet out;
  for (const auto& g : gts) {
    if (!object_hidden(t_i, g, score_min, meta)) out.insert(g.id);
  }
  return out;
}

GroundTruthSet select_gts(const GroundTruthSet& gts, const FailedSet& ids) {
  GroundTruthSet out;
  for (const auto& g : gts) {
    if (ids.count(g.id) != 0) out.push_back(g);
  }
  return out;
}

double imperceptibility_loss(const Image& x, const Image& x_adv, const Heatmap& heat,
                             const FgBgMask& mask, double epsilon) {
  check_shapes(x, x_adv, heat, mask);
  double d_bg = 0.0;
  double d_fg = 0.0;
  double l2 = 0.0;
  for (int y = 0; y < x.height; ++y) {
    for (int xx = 0; xx < x.width; ++xx) {
      const double hw = heat.at(y, xx);
      const bool fg = mask.is_fg(y, xx);
      for (int c = 0; c < Image::kChannels; ++c) {
        const double a = x.at(y, xx, c);
        const double b = x_adv.at(y, xx, c);
        if (fg) {
          d_fg += smooth_l1(a * hw, b * hw);
        } else {
          d_bg += smooth_l1(a, b);
        }
        const double gh = (b - a) * hw;
        l2 += gh * gh;
      }
    }
  }
  return d_bg + d_fg + epsilon * std::sqrt(l2);
}

Image imperceptibility_grad(const Image& x, const Image& x_adv, const Heatmap& heat,
                            const FgBgMask& mask, double epsilon) {
  check_shapes(x, x_adv, heat, mask);
  Image g(x.height, x.width, 0.0);
  double l2 = 0.0;
  for (int y = 0; y < x.height; ++y) {
    for (int xx = 0; xx < x.width; ++xx) {
      const double hw = heat.at(y, xx);
      for (int c = 0; c < Image::kChannels; ++c) {
        const double gh = (x_adv.at(y, xx, c) - x.at(y, xx, c)) * hw;
        l2 += gh * gh;
      }
    }
  }
  const double norm = std::sqrt(l2);
  auto sl1_grad = [](double diff) { return std::abs(diff) < 1.0 ? diff : (diff > 0 ? 1.0 : -1.0); };
  for (int y = 0; y < x.height; ++y) {
    for (int xx = 0; xx < x.width; ++xx) {
      const double hw = heat.at(y, xx);
      const bool fg = mask.is_fg(y, xx);
      for (int c = 0; c < Image::kChannels; ++c) {
        const double diff = x_adv.at(y, xx, c) - x.at(y, xx, c);
        double v = fg ? sl1_grad(diff * hw) * hw : sl1_grad(diff);
        if (norm > 0.0) v += epsilon * diff * hw * hw / norm;
        g.at(y, xx, c) = v;
      }
    }
  }
  return g;
}

}  // namespace lgp
