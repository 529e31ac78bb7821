#pragma once

// Detection quality and perceptual distance metrics.
//
// Quantities that can be undefined use std::optional: map50 has no value
// without ground truth, and the PSNR family has none for identical images.

#include <cstddef>
#include <optional>
#include <vector>

#include "lgp/assigner.hpp"
#include "lgp/types.hpp"

namespace lgp {

struct MetricReport {
  std::optional<double> map50;
  std::size_t n_t = 0;
  std::size_t n75 = 0;
  std::optional<double> psnr;
  std::optional<double> psnr_b;

  friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

/// Area under the all-point interpolated precision/recall curve. Points are
/// given in detection order (recall non-decreasing).
double average_precision(const std::vector<double>& recall, const std::vector<double>& precision);

/// Mean over GT classes of the per-class AP at IoU >= iou_thresh. Each
/// detection, in descending score order, is matched to its highest-IoU GT of
/// the same class in the same image; a second hit on a GT counts as a false
/// positive. `dets` and `gts` are indexed by image.
std::optional<double> map50(const std::vector<DetectionSet>& dets,
                            const std::vector<GroundTruthSet>& gts, double iou_thresh = 0.5);

/// Single-image convenience overload.
std::optional<double> map50(const DetectionSet& dets, const GroundTruthSet& gts);

/// Detections whose IoU with any GT is >= 0.75, ignoring labels.
std::size_t count_n75(const DetectionSet& dets, const GroundTruthSet& gts);

std::size_t count_initial_targets(const TargetSet& t_org);

/// Rec.601 luma of every pixel, row-major.
std::vector<double> luminance(const Image& img);

/// PSNR of the luma channel with peak 1.
std::optional<double> psnr(const Image& x, const Image& x_adv);

/// PSNR-B: the luma MSE is augmented by the blocking effect factor of
/// `x_adv`, measured across the edges of a `block` x `block` grid.
std::optional<double> psnr_b(const Image& x, const Image& x_adv, int block = 8);

/// Blocking effect factor of a luma plane.
double blocking_effect_factor(const std::vector<double>& luma, int height, int width, int block);

}  // namespace lgp
