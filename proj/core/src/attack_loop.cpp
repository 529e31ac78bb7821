#include "lgp/attack_loop.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lgp/errors.hpp"

namespace lgp {

void validate_config(const AttackConfig& cfg) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  require(cfg.max_iters >= 0, "max_iters must be >= 0");
  require(cfg.optimizer.learning_rate > 0.0, "learning rate must be > 0");
  require(cfg.optimizer.name == "adamax" || cfg.optimizer.name == "adam",
          "optimizer must be adamax or adam");
  require(cfg.weights.zeta > 0.0 && std::isfinite(cfg.weights.zeta), "zeta must be > 0");
  require(std::isfinite(cfg.weights.alpha) && std::isfinite(cfg.weights.beta) &&
              std::isfinite(cfg.weights.tau),
          "loss weights must be finite");
  require(cfg.delta > 0.0 && cfg.eta > 0.0, "delta and eta must be > 0");
  require(cfg.epsilon >= 0.0, "epsilon must be >= 0");
  require(cfg.n_i >= 0 && cfg.n_s >= 0 && cfg.n_i + cfg.n_s >= 1, "n_i + n_s must be >= 1");
  require(cfg.score_min > 0.0 && cfg.score_min < 1.0, "score_min must lie in (0, 1)");
  require(cfg.nms_iou > 0.0 && cfg.nms_iou < 1.0, "nms_iou must lie in (0, 1)");
}

Optimizer::Optimizer(const OptimizerConfig& cfg) : cfg_(cfg) {
  if (cfg_.name != "adamax" && cfg_.name != "adam") {
    throw ConfigError("unknown optimizer '" + cfg_.name + "'");
  }
}

void Optimizer::step(std::vector<double>& params, const std::vector<double>& grad) {
  if (m_.empty()) {
    m_.assign(params.size(), 0.0);
    v_.assign(params.size(), 0.0);
  }
  ++t_;
  const double b1 = cfg_.beta1;
  const double b2 = cfg_.beta2;
  const double bias1 = 1.0 - std::pow(b1, t_);
  if (cfg_.name == "adamax") {
    const double lr = cfg_.learning_rate / bias1;
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = b1 * m_[i] + (1.0 - b1) * grad[i];
      v_[i] = std::max(b2 * v_[i], std::abs(grad[i]) + cfg_.eps);
      params[i] -= lr * m_[i] / v_[i];
    }
  } else {
    const double bias2 = 1.0 - std::pow(b2, t_);
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = b1 * m_[i] + (1.0 - b1) * grad[i];
      v_[i] = b2 * v_[i] + (1.0 - b2) * grad[i] * grad[i];
      params[i] -= cfg_.learning_rate * (m_[i] / bias1) / (std::sqrt(v_[i] / bias2) + cfg_.eps);
    }
  }
}

double linf_norm(const Image& img) {
  double m = 0.0;
  for (const double v : img.data) m = std::max(m, std::abs(v));
  return m;
}

namespace {

// Keeps x + gamma inside [0, 1].
void clamp_to_pixels(const Image& x, Image& gamma) {
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    gamma.data[i] = std::clamp(x.data[i] + gamma.data[i], 0.0, 1.0) - x.data[i];
  }
}

Image add(const Image& x, const Image& gamma) {
  Image out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = std::clamp(x.data[i] + gamma.data[i], 0.0, 1.0);
  return out;
}

std::vector<std::size_t> surviving_indices(const ProposalSet& props, double nms_iou, double score_min) {
  std::vector<ScoredBox> cand;
  std::vector<std::size_t> source;
  for (std::size_t i = 0; i < props.size(); ++i) {
    if (props[i].score >= score_min) {
      cand.push_back({props[i].box, props[i].score});
      source.push_back(i);
    }
  }
  std::vector<std::size_t> out;
  for (const std::size_t k : nms(cand, nms_iou)) out.push_back(source[k]);
  return out;
}

AEResult identity_result(const Image& x, const std::string& optimizer) {
  AEResult r;
  r.x_adv = x;
  r.gamma = Image(x.height, x.width, 0.0);
  r.optimizer = optimizer;
  return r;
}

LossValue evaluate_with_grad(const DetectorAdapter& adapter, const Image& image,
                             const ProposalSet& props, const LossBuilder& builder, Image& grad) {
  LossValue lv = builder(props);
  if (!std::isfinite(lv.value)) throw GradientError(lv.value);
  grad = adapter.backward(image, lv.grad);
  return lv;
}

}  // namespace

TargetSet make_original_targets(const ProposalSet& clean, const GroundTruthSet& gts,
                                const AttackConfig& cfg) {
  switch (cfg.target_source) {
    case TargetSource::kAssigner:
      return assign_original_targets(clean, gts, {cfg.n_i, cfg.n_s, cfg.iou_floor});
    case TargetSource::kPreNms: {
      std::vector<std::size_t> all(clean.size());
      std::iota(all.begin(), all.end(), std::size_t{0});
      return assign_all_targets(clean, gts, all, cfg.iou_floor);
    }
    case TargetSource::kPredictions:
      return assign_all_targets(clean, gts, surviving_indices(clean, cfg.nms_iou, cfg.score_min),
                                cfg.iou_floor);
  }
  throw ConfigError("unknown target source");
}

AEResult lgp_attack(const DetectorAdapter& adapter, const Image& x, const GroundTruthSet& gts_in,
                    const AttackConfig& cfg) {
  validate_config(cfg);
  validate_image(x);
  const DetectorMeta meta = adapter.meta();
  const ProposalSet clean = detect_raw(adapter, x);

  GroundTruthSet gts = gts_in;
  if (cfg.gt_source == GtSource::kCleanPredictions) {
    gts.clear();
    const auto dets = postprocess(clean, cfg.nms_iou, cfg.prediction_score);
    for (std::size_t i = 0; i < dets.size(); ++i) {
      gts.push_back({static_cast<int>(i), dets[i].box, dets[i].label});
    }
  }
  if (gts.empty()) return identity_result(x, cfg.optimizer.name);

  const TargetSet t_org = make_original_targets(clean, gts, cfg);
  if (t_org.empty()) throw NoTargetsError("no proposal overlaps any ground-truth object");

  AEResult result = identity_result(x, cfg.optimizer.name);
  result.num_targets = t_org.records.size();
  Optimizer opt(cfg.optimizer);

  FailedSet failed;
  for (const auto& g : gts) failed.insert(g.id);
  const Heatmap static_heat = build_heatmap(gts, x.height, x.width, cfg.delta, cfg.eta);
  const FgBgMask static_mask = build_mask(gts, x.height, x.width, cfg.delta);

  Image& gamma = result.gamma;
  Image grad_attack;
  // Iterate i is evaluated before step i; the loop stops as soon as an
  // evaluated iterate hides every object, so x_adv is never stepped past it.
  for (int i = 1;; ++i) {
    const Image x_i = add(x, gamma);
    const ProposalSet props = detect_raw(adapter, x_i);
    const TargetSet t_i = track_targets(props, t_org);
    failed = update_failed_set(t_i, gts, cfg.score_min, meta);
    if (failed.empty() || i > cfg.max_iters) break;
    const auto adv = build_adversarial_targets(t_i, gts, cfg.weights.zeta, meta);

    const LossBuilder builder = make_attack_loss(t_i, adv, cfg.weights, meta, cfg.terms);
    const LossValue lv = evaluate_with_grad(adapter, x_i, props, builder, grad_attack);

    double dist = 0.0;
    Image grad_dist;
    switch (cfg.distance) {
      case DistanceMode::kObjectWise: {
        const GroundTruthSet failed_gts = select_gts(gts, failed);
        const Heatmap heat = build_heatmap(failed_gts, x.height, x.width, cfg.delta, cfg.eta);
        const FgBgMask mask = build_mask(failed_gts, x.height, x.width, cfg.delta);
        dist = imperceptibility_loss(x, x_i, heat, mask, cfg.epsilon);
        grad_dist = imperceptibility_grad(x, x_i, heat, mask, cfg.epsilon);
        break;
      }
      case DistanceMode::kStaticHeatmap:
        dist = imperceptibility_loss(x, x_i, static_heat, static_mask, cfg.epsilon);
        grad_dist = imperceptibility_grad(x, x_i, static_heat, static_mask, cfg.epsilon);
        break;
      case DistanceMode::kImage:
      case DistanceMode::kImageL2: {
        const double eps = cfg.distance == DistanceMode::kImage ? 0.0 : cfg.epsilon;
        const Heatmap heat = uniform_heatmap(x.height, x.width, cfg.eta);
        const FgBgMask mask = background_mask(x.height, x.width);
        dist = imperceptibility_loss(x, x_i, heat, mask, eps);
        grad_dist = imperceptibility_grad(x, x_i, heat, mask, eps);
        break;
      }
    }

    std::vector<double> total(gamma.size());
    for (std::size_t k = 0; k < total.size(); ++k) {
      total[k] = cfg.lambda1 * grad_attack.data[k] + cfg.lambda2 * grad_dist.data[k];
    }
    opt.step(gamma.data, total);
    clamp_to_pixels(x, gamma);

    result.trace.push_back({lv.value, dist, failed.size(), linf_norm(gamma)});
    result.iterations_run = i;
  }

  result.x_adv = add(x, gamma);
  for (const auto& g : gts) {
    if (failed.count(g.id) == 0) result.succeeded.push_back(g.id);
  }
  return result;
}

AEResult pgd_attack(const DetectorAdapter& adapter, const Image& x, const GroundTruthSet& gts,
                    const PgdConfig& cfg) {
  if (!(cfg.eps >= 0.0)) throw ConfigError("pgd eps must be >= 0");
  if (cfg.steps < 0) throw ConfigError("pgd steps must be >= 0");
  validate_image(x);
  const DetectorMeta meta = adapter.meta();
  const double step = cfg.step_size > 0.0 ? cfg.step_size : cfg.eps / 4.0;
  AEResult result = identity_result(x, "sign-gradient");
  if (gts.empty() || cfg.eps == 0.0) return result;

  const TargetSet targets = assign_original_targets(detect_raw(adapter, x), gts, cfg.assign);
  result.num_targets = targets.records.size();
  if (targets.empty()) return result;

  const LossBuilder builder = [&](const ProposalSet& props) {
    LossValue lv;
    lv.grad.resize(props.size());
    for (const auto& r : targets.records) {
      const Proposal& p = props[r.origin_index];
      ProposalGrad& g = lv.grad[r.origin_index];
      if (cfg.mode == PgdMode::kCls) {
        // score = p_c for the best foreground class c; dp_c/dz_j = p_c (1[j=c] - p_j).
        int c = -1;
        for (int k = 0; k < static_cast<int>(p.probs.size()); ++k) {
          if (k != meta.null_label && (c < 0 || p.probs[k] > p.probs[c])) c = k;
        }
        lv.value += p.score;
        g.logits.assign(p.probs.size(), 0.0);
        for (std::size_t j = 0; j < p.probs.size(); ++j) {
          g.logits[j] = p.probs[c] * ((static_cast<int>(j) == c ? 1.0 : 0.0) - p.probs[j]);
        }
      } else {
        const Box& gt = find_gt(gts, r.gt_id)->box;
        lv.value += loss_loc(p.box, gt);
        const auto d = loss_loc_grad(p.box, gt);
        g.cx += d[0];
        g.cy += d[1];
        g.w += d[2];
        g.h += d[3];
        g.theta += d[4];
      }
    }
    return lv;
  };

  Image& gamma = result.gamma;
  Image grad;
  for (int s = 1; s <= cfg.steps; ++s) {
    const Image x_s = add(x, gamma);
    const ProposalSet props = detect_raw(adapter, x_s);
    const LossValue lv = evaluate_with_grad(adapter, x_s, props, builder, grad);
    for (std::size_t k = 0; k < gamma.size(); ++k) {
      const double g = grad.data[k];
      const double sgn = g > 0.0 ? 1.0 : (g < 0.0 ? -1.0 : 0.0);
      gamma.data[k] = std::clamp(gamma.data[k] - step * sgn, -cfg.eps, cfg.eps);
    }
    clamp_to_pixels(x, gamma);
    // The pixel clamp can round one ulp past the budget.
    for (double& v : gamma.data) v = std::clamp(v, -cfg.eps, cfg.eps);
    result.trace.push_back({lv.value, 0.0, 0, linf_norm(gamma)});
    result.iterations_run = s;
  }
  result.x_adv = add(x, gamma);
  for (const auto& g : gts) {
    if (object_hidden(track_targets(detect_raw(adapter, result.x_adv), targets), g, 0.05, meta)) {
      result.succeeded.push_back(g.id);
    }
  }
  return result;
}

}  // namespace lgp
