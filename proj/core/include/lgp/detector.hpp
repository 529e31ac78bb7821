#pragma once

// The detector-adapter contract. An adapter exposes its raw pre-NMS outputs
// and a vector-Jacobian product from proposal-space gradients back to pixels;
// everything else in the attack is written against this interface.

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "lgp/types.hpp"

namespace lgp {

/// Gradient of a scalar loss with respect to the differentiable fields of one
/// proposal. Probabilities are a function of the logits, so only logits appear.
struct ProposalGrad {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;
  double theta = 0.0;
  std::vector<double> logits;

  bool is_zero() const;
};

struct LossValue {
  double value = 0.0;
  /// Either empty (zero gradient) or one entry per proposal.
  std::vector<ProposalGrad> grad;
};

using LossBuilder = std::function<LossValue(const ProposalSet&)>;

class DetectorAdapter {
 public:
  virtual ~DetectorAdapter() = default;

  virtual std::string name() const = 0;
  virtual DetectorMeta meta() const = 0;
  /// True when the adapter may be called from several threads at once.
  virtual bool reentrant() const { return false; }

  virtual ProposalSet detect_raw(const Image& image) const = 0;
  /// d(loss)/d(pixels) given d(loss)/d(proposal fields) for detect_raw(image).
  virtual Image backward(const Image& image, const std::vector<ProposalGrad>& grads) const = 0;
};

/// Runs the adapter's raw pass; validates the image and wraps foreign
/// failures in DetectorError.
ProposalSet detect_raw(const DetectorAdapter& adapter, const Image& image);

/// Score filter followed by greedy NMS.
DetectionSet detect_final(const DetectorAdapter& adapter, const Image& image, double nms_iou,
                          double score_min);
DetectionSet postprocess(const ProposalSet& proposals, double nms_iou, double score_min);

/// Gradient of loss_builder(detect_raw(image)) with respect to the pixels.
/// Throws GradientError when the loss is not finite.
Image pixel_gradient(const DetectorAdapter& adapter, const Image& image,
                     const LossBuilder& loss_builder, double* loss_out = nullptr);

/// Named adapter factories; the CLI selects one with --detector.
class AdapterRegistry {
 public:
  using Factory = std::function<std::unique_ptr<DetectorAdapter>()>;

  static AdapterRegistry& instance();

  void add(const std::string& name, Factory factory);
  std::unique_ptr<DetectorAdapter> create(const std::string& name) const;
  std::vector<std::string> names() const;

 private:
  AdapterRegistry();
  std::map<std::string, Factory> factories_;
};

}  // namespace lgp
