#pragma once

// Analytic, differentiable one-stage detector used for desk-scale runs.
//
// Every pixel gets a flat-topped color-match response per class. Each anchor
// of a dense stride-8 grid scores the classes by the mean response over a
// small window around its center, and regresses its box by marching rays from
// the center in the four axis directions: the expected run length of
// foreground mass along a ray is the distance to the object edge.

#include <array>
#include <string>
#include <vector>

#include "lgp/detector.hpp"

namespace lgp {

using Color = std::array<double, 3>;

/// Class colors of the synthetic scenes; index == class label.
const std::vector<Color>& toy_palette();

struct ToyDetectorOptions {
  int stride = 8;
  int score_half = 2;  // class score window is (2*score_half)^2 pixels
  int band_half = 2;   // rays average this many rows/cols on each side
  int max_ray = 48;
  double kappa = 20.0;
  double threshold = 0.85;
  double sigma = 0.15;
  double min_extent = 0.5;
  /// false hides the background logit: index num_classes becomes a constant
  /// null logit and the attack falls back to cross-entropy.
  bool background_logit = true;
  std::vector<Color> colors = toy_palette();
};

class ToyDetector final : public DetectorAdapter {
 public:
  explicit ToyDetector(ToyDetectorOptions options = {});

  std::string name() const override;
  DetectorMeta meta() const override;
  bool reentrant() const override { return true; }

  ProposalSet detect_raw(const Image& image) const override;
  Image backward(const Image& image, const std::vector<ProposalGrad>& grads) const override;

  int num_anchors(int height, int width) const;
  Point anchor_center(int index, int width) const;
  /// No pixel farther than this (Chebyshev distance, pixel centers) from an
  /// anchor center influences that anchor's outputs.
  double receptive_radius() const;
  const ToyDetectorOptions& options() const { return opt_; }

 private:
  struct Maps;
  Maps compute_maps(const Image& image) const;

  ToyDetectorOptions opt_;
};

}  // namespace lgp
