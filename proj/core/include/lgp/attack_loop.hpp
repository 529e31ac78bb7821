#pragma once

// The joint optimization loop and the budgeted PGD baselines.

#include <cstdint>
#include <string>
#include <vector>

#include "lgp/attacker.hpp"
#include "lgp/detector.hpp"
#include "lgp/limiter.hpp"

namespace lgp {

/// Distance used for the imperceptibility term.
enum class DistanceMode {
  kObjectWise,     // adaptive foreground/background split with the heatmap
  kImage,          // smooth-L1 over the whole image
  kImageL2,        // smooth-L1 + epsilon * l2 over the whole image
  kStaticHeatmap,  // object-wise weighting, but the failed set never shrinks
};

/// Where the original targets come from.
enum class TargetSource {
  kAssigner,     // per-object quotas of high-quality proposals
  kPreNms,       // every raw proposal overlapping an object
  kPredictions,  // proposals that survive the clean post-processing
};

enum class GtSource { kAnnotations, kCleanPredictions };

struct OptimizerConfig {
  std::string name = "adamax";
  double learning_rate = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AttackConfig {
  double lambda1 = 1.0;
  double lambda2 = 0.1;
  LossWeights weights;
  LossTerms terms;
  double delta = 1.5;
  double eta = 1.0;
  double epsilon = 0.1;
  int n_i = 5;
  int n_s = 5;
  double iou_floor = 0.1;
  int max_iters = 50;
  OptimizerConfig optimizer;
  double score_min = 0.05;
  std::uint64_t seed = 0;
  DistanceMode distance = DistanceMode::kObjectWise;
  TargetSource target_source = TargetSource::kAssigner;
  GtSource gt_source = GtSource::kAnnotations;
  double nms_iou = 0.5;           // post-processing used for clean predictions
  double prediction_score = 0.3;  // score floor for clean predictions
};

/// Throws ConfigError on out-of-range settings.
void validate_config(const AttackConfig& cfg);

struct IterationTrace {
  double attack_loss = 0.0;
  double distance_loss = 0.0;
  std::size_t failed = 0;
  double gamma_linf = 0.0;
};

struct AEResult {
  Image x_adv;
  Image gamma;
  int iterations_run = 0;
  std::vector<IterationTrace> trace;
  std::vector<int> succeeded;
  std::string optimizer;
  std::size_t num_targets = 0;
};

/// First-order optimizer with a per-coordinate adaptive step.
class Optimizer {
 public:
  explicit Optimizer(const OptimizerConfig& cfg);
  void step(std::vector<double>& params, const std::vector<double>& grad);
  const std::string& name() const { return cfg_.name; }

 private:
  OptimizerConfig cfg_;
  std::vector<double> m_;
  std::vector<double> v_;
  int t_ = 0;
};

/// Builds the original targets of an attack on the clean proposals.
TargetSet make_original_targets(const ProposalSet& clean, const GroundTruthSet& gts,
                                const AttackConfig& cfg);

AEResult lgp_attack(const DetectorAdapter& adapter, const Image& x, const GroundTruthSet& gts,
                    const AttackConfig& cfg);

enum class PgdMode { kCls, kReg };

struct PgdConfig {
  PgdMode mode = PgdMode::kCls;
  double eps = 8.0 / 255.0;
  int steps = 20;
  double step_size = -1.0;  // <= 0 selects eps / 4
  AssignOptions assign;
};

/// Sign-gradient descent on the summed foreground score (cls) or the summed
/// localization loss (reg) of the assigned targets, projected onto the
/// l-infinity ball of radius eps after every step.
AEResult pgd_attack(const DetectorAdapter& adapter, const Image& x, const GroundTruthSet& gts,
                    const PgdConfig& cfg);

double linf_norm(const Image& img);

}  // namespace lgp
