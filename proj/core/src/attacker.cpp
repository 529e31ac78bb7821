#include "lgp/attacker.hpp"

#include <algorithm>
#include <cmath>

#include "lgp/errors.hpp"

namespace lgp {

namespace {

using D5 = ad::Dual<5>;

geom::BoxT<D5> seed_box(const Box& b) {
  return {D5::variable(b.cx, 0), D5::variable(b.cy, 1), D5::variable(b.w, 2),
          D5::variable(b.h, 3), D5::variable(b.kind == BoxKind::kObb ? b.theta : 0.0, 4)};
}

geom::BoxT<D5> const_box(const Box& b) {
  return {D5(b.cx), D5(b.cy), D5(b.w), D5(b.h), D5(b.kind == BoxKind::kObb ? b.theta : 0.0)};
}

template <class T>
T shape_term(const geom::BoxT<T>& b, const geom::BoxT<T>& bp) {
  return geom::smooth_l1(b.w, bp.w) + geom::smooth_l1(b.h, bp.h);
}

template <class T>
T loc_term(const geom::BoxT<T>& b, const geom::BoxT<T>& g) {
  return geom::iou(b, g) - geom::center_distance(b, g);
}

void check_bg(const std::vector<double>& logits, int bg_index) {
  if (bg_index < 0 || bg_index >= static_cast<int>(logits.size())) {
    throw InvalidArgument("background index " + std::to_string(bg_index) + " out of range");
  }
}

double log_sum_exp(const std::vector<double>& z) {
  const double mx = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (const double v : z) s += std::exp(v - mx);
  return mx + std::log(s);
}

}  // namespace

std::vector<AdversarialTarget> build_adversarial_targets(const TargetSet& t_i,
                                                         const GroundTruthSet& gts, double zeta,
                                                         const DetectorMeta& meta) {
  std::vector<AdversarialTarget> out;
  out.reserve(t_i.records.size());
  for (const auto& r : t_i.records) {
    const GroundTruthObject* gt = find_gt(gts, r.gt_id);
    if (gt == nullptr) {
      throw ConsistencyError("tracked target refers to unknown gt id " + std::to_string(r.gt_id));
    }
    out.push_back({scale_box(r.current.box, zeta), gt->box, meta.null_label});
  }
  return out;
}

double loss_shape(const Box& b, const Box& b_prime) {
  return shape_term(to_params(b), to_params(b_prime));
}

double loss_loc(const Box& b, const Box& b_gt) { return loc_term(to_params(b), to_params(b_gt)); }

double loss_cls_ce(const std::vector<double>& logits, int bg_index) {
  check_bg(logits, bg_index);
  return -logits[bg_index] + log_sum_exp(logits);
}

double loss_cls_logit(const std::vector<double>& logits, int bg_index) {
  check_bg(logits, bg_index);
  return -logits[bg_index];
}

std::array<double, 5> loss_shape_grad(const Box& b, const Box& b_prime) {
  const D5 v = shape_term(seed_box(b), const_box(b_prime));
  return v.d;
}

std::array<double, 5> loss_loc_grad(const Box& b, const Box& b_gt) {
  const D5 v = loc_term(seed_box(b), const_box(b_gt));
  return v.d;
}

std::vector<double> loss_cls_ce_grad(const std::vector<double>& logits, int bg_index) {
  check_bg(logits, bg_index);
  std::vector<double> g = softmax(logits);
  g[bg_index] -= 1.0;
  return g;
}

std::vector<double> loss_cls_logit_grad(const std::vector<double>& logits, int bg_index) {
  check_bg(logits, bg_index);
  std::vector<double> g(logits.size(), 0.0);
  g[bg_index] = -1.0;
  return g;
}

namespace {

struct Coeffs {
  double shape;
  double loc;
  double cls;
};

Coeffs coefficients(std::size_t n, const LossWeights& w, const LossTerms& terms) {
  const double inv = 1.0 / static_cast<double>(n);
  return {terms.shape ? w.alpha * inv : 0.0, terms.loc ? w.beta * inv : 0.0,
          terms.cls ? w.tau * (terms.eq6_literal ? 1.0 : inv) : 0.0};
}

void check_aligned(const TargetSet& t_i, const std::vector<AdversarialTarget>& adv) {
  if (t_i.records.empty()) throw NoTargetsError("attack loss needs at least one target");
  if (t_i.records.size() != adv.size()) {
    throw ConsistencyError("targets and adversarial targets are not aligned");
  }
}

}  // namespace

double attack_loss(const TargetSet& t_i, const std::vector<AdversarialTarget>& adv,
                   const LossWeights& weights, const DetectorMeta& meta, const LossTerms& terms) {
  check_aligned(t_i, adv);
  const Coeffs k = coefficients(adv.size(), weights, terms);
  double total = 0.0;
  for (std::size_t n = 0; n < adv.size(); ++n) {
    const Proposal& p = t_i.records[n].current;
    if (k.shape != 0.0) total += k.shape * loss_shape(p.box, adv[n].b_prime);
    if (k.loc != 0.0) total += k.loc * loss_loc(p.box, adv[n].b_gt);
    if (k.cls != 0.0) {
      total += k.cls * (meta.has_background_class ? loss_cls_logit(p.logits, adv[n].bg_label)
                                                  : loss_cls_ce(p.logits, adv[n].bg_label));
    }
  }
  return total;
}

LossValue attack_loss_value(const ProposalSet& proposals, const TargetSet& t_i,
                            const std::vector<AdversarialTarget>& adv, const LossWeights& weights,
                            const DetectorMeta& meta, const LossTerms& terms) {
  check_aligned(t_i, adv);
  const Coeffs k = coefficients(adv.size(), weights, terms);
  LossValue out;
  out.grad.resize(proposals.size());
  for (std::size_t n = 0; n < adv.size(); ++n) {
    const std::size_t idx = t_i.records[n].current_index;
    if (idx >= proposals.size()) throw ConsistencyError("tracked index outside the proposal set");
    const Proposal& p = proposals[idx];
    ProposalGrad& g = out.grad[idx];
    auto add_box = [&g](const std::array<double, 5>& d, double scale) {
      g.cx += scale * d[0];
      g.cy += scale * d[1];
      g.w += scale * d[2];
      g.h += scale * d[3];
      g.theta += scale * d[4];
    };
    if (k.shape != 0.0) {
      out.value += k.shape * loss_shape(p.box, adv[n].b_prime);
      add_box(loss_shape_grad(p.box, adv[n].b_prime), k.shape);
    }
    if (k.loc != 0.0) {
      out.value += k.loc * loss_loc(p.box, adv[n].b_gt);
      add_box(loss_loc_grad(p.box, adv[n].b_gt), k.loc);
    }
    if (k.cls != 0.0) {
      const int bg = adv[n].bg_label;
      const bool logit = meta.has_background_class;
      out.value += k.cls * (logit ? loss_cls_logit(p.logits, bg) : loss_cls_ce(p.logits, bg));
      const auto d = logit ? loss_cls_logit_grad(p.logits, bg) : loss_cls_ce_grad(p.logits, bg);
      if (g.logits.empty()) g.logits.assign(d.size(), 0.0);
      for (std::size_t j = 0; j < d.size(); ++j) g.logits[j] += k.cls * d[j];
    }
  }
  return out;
}

LossBuilder make_attack_loss(TargetSet t_i, std::vector<AdversarialTarget> adv,
                             LossWeights weights, DetectorMeta meta, LossTerms terms) {
  return [t = std::move(t_i), a = std::move(adv), weights, meta, terms](const ProposalSet& props) {
    return attack_loss_value(props, t, a, weights, meta, terms);
  };
}

}  // namespace lgp
