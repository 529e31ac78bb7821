#pragma once

// Hiding-attack losses: push every tracked target toward a rescaled shape,
// away from its ground truth, and toward the background label.

#include <vector>

#include "lgp/assigner.hpp"
#include "lgp/detector.hpp"

namespace lgp {

struct AdversarialTarget {
  Box b_prime;  // tracked box with w, h scaled by zeta
  Box b_gt;
  int bg_label = 0;
};

struct LossWeights {
  double alpha = 1.0;
  double beta = 1.0;
  double tau = 1.0;
  double zeta = 0.1;
};

/// Which terms enter the combined loss. `eq6_literal` leaves the
/// classification sum un-normalized by the target count.
struct LossTerms {
  bool shape = true;
  bool loc = true;
  bool cls = true;
  bool eq6_literal = false;
};

std::vector<AdversarialTarget> build_adversarial_targets(const TargetSet& t_i,
                                                         const GroundTruthSet& gts, double zeta,
                                                         const DetectorMeta& meta);

double loss_shape(const Box& b, const Box& b_prime);
double loss_loc(const Box& b, const Box& b_gt);
double loss_cls_ce(const std::vector<double>& logits, int bg_index);
double loss_cls_logit(const std::vector<double>& logits, int bg_index);

/// Per-box gradients (cx, cy, w, h, theta).
std::array<double, 5> loss_shape_grad(const Box& b, const Box& b_prime);
std::array<double, 5> loss_loc_grad(const Box& b, const Box& b_gt);
std::vector<double> loss_cls_ce_grad(const std::vector<double>& logits, int bg_index);
std::vector<double> loss_cls_logit_grad(const std::vector<double>& logits, int bg_index);

/// Combined loss over the tracked snapshots held in t_i.
double attack_loss(const TargetSet& t_i, const std::vector<AdversarialTarget>& adv,
                   const LossWeights& weights, const DetectorMeta& meta,
                   const LossTerms& terms = {});

/// The same loss as a function of a fresh proposal set, reading each target at
/// its tracked index, with gradients for the detector's backward pass.
LossValue attack_loss_value(const ProposalSet& proposals, const TargetSet& t_i,
                            const std::vector<AdversarialTarget>& adv, const LossWeights& weights,
                            const DetectorMeta& meta, const LossTerms& terms = {});

LossBuilder make_attack_loss(TargetSet t_i, std::vector<AdversarialTarget> adv,
                             LossWeights weights, DetectorMeta meta, LossTerms terms = {});

}  // namespace lgp
