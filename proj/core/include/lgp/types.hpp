#pragma once

// Value types exchanged between the detector, the attack and the metrics.

#include <cstddef>
#include <vector>

#include "lgp/geometry.hpp"

namespace lgp {

/// H x W x 3 array of reals stored row-major with interleaved channels.
/// Clean and adversarial images live in [0, 1]; the same container also
/// carries perturbations and pixel gradients, which are unconstrained.
struct Image {
  static constexpr int kChannels = 3;

  int height = 0;
  int width = 0;
  std::vector<double> data;

  Image() = default;
  Image(int h, int w, double fill = 0.0)
      : height(h), width(w), data(static_cast<std::size_t>(h) * w * kChannels, fill) {}

  std::size_t index(int y, int x, int c) const {
    return (static_cast<std::size_t>(y) * width + x) * kChannels + c;
  }
  double& at(int y, int x, int c) { return data[index(y, x, c)]; }
  double at(int y, int x, int c) const { return data[index(y, x, c)]; }
  std::size_t size() const { return data.size(); }
  bool same_shape(const Image& o) const { return height == o.height && width == o.width; }

  friend bool operator==(const Image&, const Image&) = default;
};

/// Throws InvalidArgument unless values lie in [0, 1] and H, W >= 16.
void validate_image(const Image& img);

struct GroundTruthObject {
  int id = 0;
  Box box;
  int label = 0;

  friend bool operator==(const GroundTruthObject&, const GroundTruthObject&) = default;
};
using GroundTruthSet = std::vector<GroundTruthObject>;

const GroundTruthObject* find_gt(const GroundTruthSet& gts, int id);

struct DetectorMeta {
  bool has_background_class = true;
  BoxKind box_kind = BoxKind::kHbb;
  int num_classes = 1;
  /// Index of the background logit, or of the declared null label when the
  /// detector has no background class. Always == num_classes here: logits
  /// carry num_classes foreground entries followed by this one.
  int null_label = 1;
};

/// One raw (pre-NMS) output of a detector.
struct Proposal {
  Box box;
  std::vector<double> logits;
  std::vector<double> probs;
  int label = 0;       // argmax of probs (may be the null label)
  double score = 0.0;  // max foreground probability
};
using ProposalSet = std::vector<Proposal>;

/// Builds probs, label and score from logits.
Proposal make_proposal(const Box& box, std::vector<double> logits, const DetectorMeta& meta);

/// Max-shifted softmax.
std::vector<double> softmax(const std::vector<double>& logits);

struct Detection {
  Box box;
  int label = 0;
  double score = 0.0;

  friend bool operator==(const Detection&, const Detection&) = default;
};
using DetectionSet = std::vector<Detection>;

}  // namespace lgp
