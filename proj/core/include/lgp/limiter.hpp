#pragma once

// The imperceptibility side of the objective: an object-wise heatmap over
// the objects still under attack, the foreground/background split it
// induces, and the adaptive distance between clean and adversarial images.

#include <cstdint>
#include <set>
#include <vector>

#include "lgp/assigner.hpp"
#include "lgp/types.hpp"

namespace lgp {

using FailedSet = std::set<int>;

struct Heatmap {
  int height = 0;
  int width = 0;
  double eta = 1.0;
  double delta = 1.5;
  std::vector<double> weights;  // row-major, one per pixel

  double at(int y, int x) const { return weights[static_cast<std::size_t>(y) * width + x]; }
};

struct FgBgMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> fg;  // 1 inside a delta-scaled failed box

  bool is_fg(int y, int x) const { return fg[static_cast<std::size_t>(y) * width + x] != 0; }
};

/// Heatmap weight at an arbitrary point: eta * |p - c| / sqrt(w^2 + h^2) of
/// the governing box when p lies in a delta-scaled box (minimum over
/// overlapping boxes), eta elsewhere.
double heat_weight(Point p, const GroundTruthSet& failed_gts, double delta, double eta);

/// Samples heat_weight at pixel centers.
Heatmap build_heatmap(const GroundTruthSet& failed_gts, int height, int width, double delta,
                      double eta);
FgBgMask build_mask(const GroundTruthSet& failed_gts, int height, int width, double delta);

/// Constant-eta heatmap and an all-background mask: the image-level distance.
Heatmap uniform_heatmap(int height, int width, double eta);
FgBgMask background_mask(int height, int width);

/// An object is hidden when every target tracked for it is background,
/// scores below score_min, or has drifted off it (IoU < 0.1). Objects with
/// no targets are never hidden.
bool object_hidden(const TargetSet& t_i, const GroundTruthObject& gt, double score_min,
                   const DetectorMeta& meta);

/// Recomputed from scratch every iteration, so an object whose detection
/// comes back re-enters the set.
FailedSet update_failed_set(const TargetSet& t_i, const GroundTruthSet& gts, double score_min,
                            const DetectorMeta& meta);

GroundTruthSet select_gts(const GroundTruthSet& gts, const FailedSet& ids);

/// d(x_bg, x_adv_bg) + d(x_fg H, x_adv_fg H) + epsilon * ||gamma H||_2, with d
/// the smooth-L1 summed over pixels and channels.
double imperceptibility_loss(const Image& x, const Image& x_adv, const Heatmap& heat,
                             const FgBgMask& mask, double epsilon);

/// Gradient of imperceptibility_loss with respect to x_adv. The l2 term uses
/// the zero subgradient at gamma = 0.
Image imperceptibility_grad(const Image& x, const Image& x_adv, const Heatmap& heat,
                            const FgBgMask& mask, double epsilon);

}  // namespace lgp
