#include "lgp/detector.hpp"

#include <algorithm>
#include <cmath>

#include "lgp/errors.hpp"
#include "lgp/toy_detector.hpp"

namespace lgp {

bool ProposalGrad::is_zero() const {
  if (cx != 0.0 || cy != 0.0 || w != 0.0 || h != 0.0 || theta != 0.0) return false;
  return std::all_of(logits.begin(), logits.end(), [](double v) { return v == 0.0; });
}

ProposalSet detect_raw(const DetectorAdapter& adapter, const Image& image) {
  validate_image(image);
  try {
    return adapter.detect_raw(image);
  } catch (const DetectorError&) {
    throw;
  } catch (const std::exception& e) {
    throw DetectorError(adapter.name(), e.what());
  }
}

DetectionSet postprocess(const ProposalSet& proposals, double nms_iou, double score_min) {
  std::vector<ScoredBox> cand;
  std::vector<std::size_t> source;
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    if (proposals[i].score >= score_min) {
      cand.push_back({proposals[i].box, proposals[i].score});
      source.push_back(i);
    }
  }
  DetectionSet out;
  for (const std::size_t k : nms(cand, nms_iou)) {
    const Proposal& p = proposals[source[k]];
    int label = 0;
    double best = -1.0;
    for (int c = 0; c < static_cast<int>(p.probs.size()); ++c) {
      // The score is the max foreground probability, so its class is the label.
      if (p.probs[c] == p.score && best < 0.0) {
        label = c;
        best = p.probs[c];
      }
    }
    out.push_back({p.box, label, p.score});
  }
  return out;
}

DetectionSet detect_final(const DetectorAdapter& adapter, const Image& image, double nms_iou,
                          double score_min) {
  return postprocess(detect_raw(adapter, image), nms_iou, score_min);
}

Image pixel_gradient(const DetectorAdapter& adapter, const Image& image,
                     const LossBuilder& loss_builder, double* loss_out) {
  const ProposalSet props = detect_raw(adapter, image);
  LossValue lv = loss_builder(props);
  if (!std::isfinite(lv.value)) throw GradientError(lv.value);
  if (loss_out != nullptr) *loss_out = lv.value;
  if (!lv.grad.empty() && lv.grad.size() != props.size()) {
    throw DetectorError(adapter.name(), "loss gradient does not cover every proposal");
  }
  try {
    return adapter.backward(image, lv.grad);
  } catch (const DetectorError&) {
    throw;
  } catch (const std::exception& e) {
    throw DetectorError(adapter.name(), e.what());
  }
}

AdapterRegistry::AdapterRegistry() {
  add("toy", [] { return std::make_unique<ToyDetector>(); });
  add("toy-nobg", [] {
    ToyDetectorOptions o;
    o.background_logit = false;
    return std::make_unique<ToyDetector>(o);
  });
}

AdapterRegistry& AdapterRegistry::instance() {
  static AdapterRegistry registry;
  return registry;
}

void AdapterRegistry::add(const std::string& name, Factory factory) {
  factories_[name] = std::move(factory);
}

std::unique_ptr<DetectorAdapter> AdapterRegistry::create(const std::string& name) const {
  const auto it = factories_.find(name);
  if (it == factories_.end()) throw ConfigError("unknown detector '" + name + "'");
  return it->second();
}

std::vector<std::string> AdapterRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : factories_) out.push_back(k);
  return out;
}

}  // namespace lgp
