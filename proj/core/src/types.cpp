#include "lgp/types.hpp"

#include <algorithm>
#include <cmath>

#include "lgp/errors.hpp"

namespace lgp {

void validate_image(const Image& img) {
  if (img.height < 16 || img.width < 16) {
    throw InvalidArgument("image must be at least 16x16, got " + std::to_string(img.height) +
                          "x" + std::to_string(img.width));
  }
  if (img.data.size() != static_cast<std::size_t>(img.height) * img.width * Image::kChannels) {
    throw InvalidArgument("image buffer size does not match its shape");
  }
  for (const double v : img.data) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("pixel value outside [0, 1]");
  }
}

const GroundTruthObject* find_gt(const GroundTruthSet& gts, int id) {
  const auto it = std::find_if(gts.begin(), gts.end(), [id](const auto& g) { return g.id == id; });
  return it == gts.end() ? nullptr : &*it;
}

std::vector<double> softmax(const std::vector<double>& logits) {
  std::vector<double> p(logits.size());
  if (logits.empty()) return p;
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    sum += p[i];
  }
  for (auto& v : p) v /= sum;
  return p;
}

Proposal make_proposal(const Box& box, std::vector<double> logits, const DetectorMeta& meta) {
  Proposal p;
  p.box = box;
  p.probs = softmax(logits);
  p.logits = std::move(logits);
  p.label = static_cast<int>(std::max_element(p.probs.begin(), p.probs.end()) - p.probs.begin());
  p.score = 0.0;
  for (int c = 0; c < static_cast<int>(p.probs.size()); ++c) {
    if (c != meta.null_label) p.score = std::max(p.score, p.probs[c]);
  }
  return p;
}

}  // namespace lgp
