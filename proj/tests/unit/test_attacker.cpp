#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "gradient_check.hpp"
#include "lgp/attack_loop.hpp"
#include "lgp/attacker.hpp"
#include "lgp/errors.hpp"
#include "lgp/toy_detector.hpp"
#include "oracles.hpp"

namespace lgp {
namespace {

const DetectorMeta kMeta{true, BoxKind::kHbb, 2, 2};

TargetRecord record(int gt_id, const Box& box, std::vector<double> logits) {
  TargetRecord r;
  r.gt_id = gt_id;
  r.origin = make_proposal(box, std::move(logits), kMeta);
  r.current = r.origin;
  return r;
}

TEST(AdversarialTargets, ScalesTrackedBox) {
  const GroundTruthSet gts = {{4, make_hbb(10, 10, 10, 10), 0}};
  TargetSet t;
  t.gt_ids = {4};
  t.records = {record(4, make_hbb(11, 9, 10, 10), {1, 0, 0})};
  EXPECT_EQ(build_adversarial_targets(t, gts, 1.0, kMeta)[0].b_prime, t.records[0].current.box);
  const auto big = build_adversarial_targets(t, gts, 3.0, kMeta)[0];
  EXPECT_DOUBLE_EQ(big.b_prime.w, 30.0);
  EXPECT_DOUBLE_EQ(big.b_prime.h, 30.0);
  EXPECT_DOUBLE_EQ(big.b_prime.cx, 11.0);
  EXPECT_EQ(big.b_gt, gts[0].box);
  EXPECT_EQ(big.bg_label, kMeta.null_label);
  EXPECT_DOUBLE_EQ(build_adversarial_targets(t, gts, 0.1, kMeta)[0].b_prime.w, 1.0);
}

TEST(AdversarialTargets, UnknownGtRaises) {
  TargetSet t;
  t.records = {record(9, make_hbb(11, 9, 10, 10), {1, 0, 0})};
  EXPECT_THROW(build_adversarial_targets(t, {{0, make_hbb(1, 1, 2, 2), 0}}, 0.1, kMeta),
               ConsistencyError);
}

TEST(LossShape, Examples) {
  const Box b = make_hbb(5, 5, 10, 10);
  EXPECT_DOUBLE_EQ(loss_shape(b, b), 0.0);
  EXPECT_DOUBLE_EQ(loss_shape(b, make_hbb(5, 5, 30, 30)), 39.0);
  EXPECT_DOUBLE_EQ(loss_shape(b, make_hbb(5, 5, 1, 1)), 17.0);
}

TEST(LossShape, IgnoresCenterAndAngle) {
  const Box b = make_obb(5, 5, 10, 12, 0.3);
  EXPECT_DOUBLE_EQ(loss_shape(b, make_obb(-3, 40, 10, 12, -1.0)), 0.0);
  const auto g = loss_shape_grad(b, make_obb(0, 0, 1, 1, 0.0));
  EXPECT_EQ(g[0], 0.0);
  EXPECT_EQ(g[1], 0.0);
  EXPECT_EQ(g[4], 0.0);
  EXPECT_DOUBLE_EQ(g[2], 1.0);
  EXPECT_DOUBLE_EQ(g[3], 1.0);
}

TEST(LossLoc, Examples) {
  const Box b = make_hbb(5, 5, 4, 4);
  EXPECT_DOUBLE_EQ(loss_loc(b, b), 1.0);
  EXPECT_DOUBLE_EQ(loss_loc(b, make_hbb(15, 5, 4, 4)), -9.5);
}

TEST(LossLoc, NeverAboveOne) {
  Rng rng(8);
  for (int i = 0; i < 500; ++i) {
    const Box a = make_obb(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(1, 8), rng.uniform(1, 8),
                           rng.uniform(-1.5, 1.5));
    const Box b = make_obb(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(1, 8), rng.uniform(1, 8),
                           rng.uniform(-1.5, 1.5));
    ASSERT_LE(loss_loc(a, b), 1.0 + 1e-12);
  }
}

// Box-parameter gradients against central differences in each coordinate.
TEST(LossGradients, BoxTermsMatchFiniteDifferences) {
  Rng rng(21);
  for (int i = 0; i < 200; ++i) {
    const Box gt = make_hbb(20, 20, rng.uniform(6, 14), rng.uniform(6, 14));
    const Box b = make_hbb(20 + rng.uniform(-4, 4), 20 + rng.uniform(-4, 4), rng.uniform(5, 15),
                           rng.uniform(5, 15));
    const Box bp = scale_box(b, 0.1);
    const auto gs = loss_shape_grad(b, bp);
    const auto gl = loss_loc_grad(b, gt);
    for (int k = 0; k < 4; ++k) {
      auto shifted = [&](double h) {
        Box c = b;
        double* fields[] = {&c.cx, &c.cy, &c.w, &c.h};
        *fields[k] += h;
        return c;
      };
      const double h = 1e-6;
      const double fs = (loss_shape(shifted(h), bp) - loss_shape(shifted(-h), bp)) / (2 * h);
      const double fl = (loss_loc(shifted(h), gt) - loss_loc(shifted(-h), gt)) / (2 * h);
      EXPECT_LE(oracle::relative_error(gs[static_cast<std::size_t>(k)], fs), 1e-6);
      EXPECT_LE(oracle::relative_error(gl[static_cast<std::size_t>(k)], fl), 1e-5) << i << " " << k;
    }
  }
}

TEST(LossClsCe, Examples) {
  EXPECT_NEAR(loss_cls_ce(std::vector<double>(5, 0.0), 2), std::log(5.0), 1e-12);
  EXPECT_LT(loss_cls_ce({0.0, 50.0, 0.0}, 1), 1e-20);
  EXPECT_NEAR(loss_cls_ce({10.0, 0.0, 0.0}, 0), std::log1p(2.0 * std::exp(-10.0)), 1e-15);
  EXPECT_NEAR(loss_cls_ce({10.0, 0.0, 0.0}, 0), 9.08e-5, 1e-7);
  EXPECT_THROW(loss_cls_ce({1.0, 2.0}, 2), InvalidArgument);
}

TEST(LossClsCe, GradientMatchesFiniteDifferences) {
  const std::vector<double> z = {0.3, -1.2, 2.0, 0.7};
  const auto g = loss_cls_ce_grad(z, 3);
  for (std::size_t j = 0; j < z.size(); ++j) {
    auto zp = z, zm = z;
    zp[j] += 1e-6;
    zm[j] -= 1e-6;
    EXPECT_NEAR(g[j], (loss_cls_ce(zp, 3) - loss_cls_ce(zm, 3)) / 2e-6, 1e-8);
  }
}

TEST(LossClsLogit, Examples) {
  EXPECT_DOUBLE_EQ(loss_cls_logit({1.0, 2.5}, 1), -2.5);
  EXPECT_DOUBLE_EQ(loss_cls_logit({1.0, 0.0}, 1), 0.0);
  for (const double zb : {-3.0, 0.0, 7.5}) {
    const auto g = loss_cls_logit_grad({0.4, zb, 1.0}, 1);
    EXPECT_EQ(g, (std::vector<double>{0.0, -1.0, 0.0}));
  }
}

struct TwoTargets {
  GroundTruthSet gts = {{0, make_hbb(10, 10, 10, 10), 0}, {1, make_hbb(40, 10, 8, 12), 1}};
  TargetSet t;
  std::vector<AdversarialTarget> adv;
  TwoTargets() {
    t.gt_ids = {0, 1};
    t.records = {record(0, make_hbb(11, 10, 9, 10), {1.5, -2, 0.2}),
                 record(1, make_hbb(39, 11, 8, 11), {-1, 2.2, -0.4})};
    adv = build_adversarial_targets(t, gts, 0.1, kMeta);
  }
};

TEST(AttackLoss, AllTermsZero) {
  TargetSet t;
  t.gt_ids = {0};
  const Box b = make_hbb(10, 10, 10, 10);
  t.records = {record(0, b, {0.0, 0.0, 0.0})};
  // b' = b, and loc is switched off since it is 1 at b = b_gt.
  const std::vector<AdversarialTarget> adv = {{b, b, 2}};
  EXPECT_DOUBLE_EQ(attack_loss(t, adv, {}, kMeta, {true, false, true, false}), 0.0);
}

TEST(AttackLoss, SingleTargetIsSumOfTerms) {
  TwoTargets s;
  s.t.records.resize(1);
  s.adv.resize(1);
  const auto& p = s.t.records[0].current;
  const double expected = loss_shape(p.box, s.adv[0].b_prime) + loss_loc(p.box, s.adv[0].b_gt) +
                          loss_cls_logit(p.logits, 2);
  EXPECT_NEAR(attack_loss(s.t, s.adv, {}, kMeta), expected, 1e-12);
  DetectorMeta ce = kMeta;
  ce.has_background_class = false;
  EXPECT_NEAR(attack_loss(s.t, s.adv, {}, ce),
              expected - loss_cls_logit(p.logits, 2) + loss_cls_ce(p.logits, 2), 1e-12);
}

TEST(AttackLoss, AlphaScalesOnlyShape) {
  TwoTargets s;
  LossWeights w;
  const double base = attack_loss(s.t, s.adv, w, kMeta);
  w.alpha = 2.0;
  const double doubled = attack_loss(s.t, s.adv, w, kMeta);
  const double shape_only = attack_loss(s.t, s.adv, {}, kMeta, {true, false, false, false});
  EXPECT_NEAR(doubled - base, shape_only, 1e-12);
  // d/d(alpha) by central difference equals the shape contribution.
  LossWeights lo, hi;
  lo.alpha = 1.0 - 1e-4;
  hi.alpha = 1.0 + 1e-4;
  EXPECT_NEAR((attack_loss(s.t, s.adv, hi, kMeta) - attack_loss(s.t, s.adv, lo, kMeta)) / 2e-4,
              shape_only, 1e-9);
}

TEST(AttackLoss, NormalizedByTargetCount) {
  TwoTargets s;
  double sum = 0.0;
  for (std::size_t n = 0; n < 2; ++n) {
    TargetSet one;
    one.records = {s.t.records[n]};
    sum += attack_loss(one, {s.adv[n]}, {}, kMeta);
  }
  EXPECT_NEAR(attack_loss(s.t, s.adv, {}, kMeta), sum / 2.0, 1e-12);
  // The literal form leaves the classification sum un-normalized.
  const double cls = attack_loss(s.t, s.adv, {}, kMeta, {false, false, true, false});
  EXPECT_NEAR(attack_loss(s.t, s.adv, {}, kMeta, {false, false, true, true}), 2.0 * cls, 1e-12);
}

TEST(AttackLoss, PermutationInvariant) {
  TwoTargets s;
  const double before = attack_loss(s.t, s.adv, {}, kMeta);
  std::reverse(s.t.records.begin(), s.t.records.end());
  std::reverse(s.adv.begin(), s.adv.end());
  EXPECT_NEAR(attack_loss(s.t, s.adv, {}, kMeta), before, 1e-12);
}

TEST(AttackLoss, EmptyAndMisalignedRaise) {
  TwoTargets s;
  EXPECT_THROW(attack_loss(TargetSet{}, {}, {}, kMeta), NoTargetsError);
  s.adv.pop_back();
  EXPECT_THROW(attack_loss(s.t, s.adv, {}, kMeta), ConsistencyError);
}

TEST(AttackLoss, ValueAgreesWithSnapshotLoss) {
  ToyDetector det;
  auto [img, gts] = render_scene(random_scene(3));
  const auto props = det.detect_raw(img);
  const TargetSet t = track_targets(props, assign_original_targets(props, gts));
  const auto adv = build_adversarial_targets(t, gts, 0.1, det.meta());
  const LossValue v = attack_loss_value(props, t, adv, {}, det.meta());
  EXPECT_NEAR(v.value, attack_loss(t, adv, {}, det.meta()), 1e-12);
  EXPECT_EQ(v.grad.size(), props.size());
}

class ThroughDetector : public ::testing::TestWithParam<int> {};

// 20 support pixels on each of 5 noisy scenes; the noise keeps the boxes off
// the piecewise kinks of the clean flat rectangles.
TEST_P(ThroughDetector, MatchesFiniteDifferences) {
  const int which = GetParam();
  ToyDetectorOptions opt;
  opt.background_logit = which != 2;
  ToyDetector det(opt);
  const LossTerms terms = which == 0   ? LossTerms{true, false, false, false}
                          : which == 1 ? LossTerms{false, true, false, false}
                                       : LossTerms{false, false, true, false};
  for (std::uint64_t s = 0; s < 5; ++s) {
    auto [img, gts] = oracle::noisy_scene(40 + s, 0.03);
    const auto builder = oracle::attack_builder(det, img, gts, terms);
    const auto r = oracle::check_builder(det, builder, img, 20, s);
    EXPECT_EQ(r.checked, 20u);
    EXPECT_EQ(r.failed, 0u) << "scene " << s << " worst " << r.worst;
  }
}

std::string term_name(const ::testing::TestParamInfo<int>& info) {
  static const char* names[] = {"Shape", "Loc", "CrossEntropy", "Logit"};
  return names[info.param];
}

INSTANTIATE_TEST_SUITE_P(Terms, ThroughDetector, ::testing::Values(0, 1, 2, 3), term_name);

TEST(AttackLoss, LogitDescentLowersTrackedScores) {
  ToyDetector det;
  const auto meta = det.meta();
  auto [x, gts] = render_scene(random_scene(4));
  const TargetSet t_org = assign_original_targets(det.detect_raw(x), gts);
  Optimizer opt(OptimizerConfig{"adamax", 0.01});
  std::vector<double> gamma(x.size(), 0.0);
  auto mean_score = [&](const TargetSet& t) {
    double s = 0.0;
    for (const auto& r : t.records) s += r.current.score;
    return s / static_cast<double>(t.records.size());
  };
  Image xi = x;
  std::vector<double> scores;
  for (int step = 0; step <= 10; ++step) {
    const TargetSet t = track_targets(det.detect_raw(xi), t_org);
    scores.push_back(mean_score(t));
    if (step == 10) break;
    const auto adv = build_adversarial_targets(t, gts, 0.1, meta);
    const Image g = pixel_gradient(det, xi, make_attack_loss(t, adv, {}, meta, {false, false, true, false}));
    opt.step(gamma, g.data);
    for (std::size_t i = 0; i < x.size(); ++i) {
      xi.data[i] = std::clamp(x.data[i] + gamma[i], 0.0, 1.0);
    }
  }
  int rises = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) rises += scores[i] > scores[i - 1];
  EXPECT_LE(rises, 2);
  EXPECT_LT(scores.back(), scores.front());
}

}  // namespace
}  // namespace lgp
