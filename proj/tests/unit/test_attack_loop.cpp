#include <gtest/gtest.h>

#include <cmath>

#include "lgp/attack_loop.hpp"
#include "lgp/errors.hpp"
#include "lgp/scene.hpp"
#include "lgp/toy_detector.hpp"

namespace lgp {
namespace {

SceneSpec three_objects() {
  SceneSpec spec;
  spec.seed = 11;
  spec.objects = {{make_hbb(30, 30, 24, 20), 0}, {make_hbb(90, 36, 20, 28), 1}, {make_hbb(60, 96, 32, 18), 2}};
  return spec;
}

bool in_range(const Image& img) {
  for (const double v : img.data) {
    if (!(v >= 0.0 && v <= 1.0)) return false;
  }
  return true;
}

TEST(LgpAttack, ZeroIterationsIsIdentity) {
  ToyDetector det;
  auto [x, gts] = render_scene(three_objects());
  AttackConfig cfg;
  cfg.max_iters = 0;
  const AEResult r = lgp_attack(det, x, gts, cfg);
  EXPECT_EQ(r.x_adv, x);
  EXPECT_EQ(r.iterations_run, 0);
  EXPECT_TRUE(r.trace.empty());
  EXPECT_EQ(linf_norm(r.gamma), 0.0);
  EXPECT_TRUE(r.succeeded.empty());
}

TEST(LgpAttack, EmptyGroundTruthIsIdentity) {
  ToyDetector det;
  auto [x, gts] = render_scene(three_objects());
  const AEResult r = lgp_attack(det, x, {}, AttackConfig{});
  EXPECT_EQ(r.x_adv, x);
  EXPECT_EQ(r.iterations_run, 0);
  EXPECT_EQ(linf_norm(r.gamma), 0.0);
}

TEST(LgpAttack, HidesThreeObjectScene) {
  ToyDetector det;
  auto [x, gts] = render_scene(three_objects());
  ASSERT_EQ(detect_final(det, x, 0.5, 0.3).size(), 3u);
  const AEResult r = lgp_attack(det, x, gts, AttackConfig{});
  for (const auto& d : detect_final(det, r.x_adv, 0.5, 0.3)) {
    for (const auto& g : gts) EXPECT_LT(iou(d.box, g.box), 0.5);
  }
  EXPECT_EQ(r.succeeded, (std::vector<int>{0, 1, 2}));
  EXPECT_GE(r.iterations_run, 1);
  EXPECT_LE(r.iterations_run, 50);
  EXPECT_EQ(r.trace.size(), static_cast<std::size_t>(r.iterations_run));
  EXPECT_GT(r.num_targets, 0u);
  EXPECT_EQ(r.optimizer, "adamax");
}

TEST(LgpAttack, ResultInvariants) {
  ToyDetector det;
  for (std::uint64_t s = 0; s < 5; ++s) {
    auto [x, gts] = render_scene(random_scene(s));
    AttackConfig cfg;
    cfg.max_iters = 3;
    const AEResult r = lgp_attack(det, x, gts, cfg);
    ASSERT_TRUE(in_range(r.x_adv));
    ASSERT_EQ(r.trace.size(), static_cast<std::size_t>(r.iterations_run));
    ASSERT_LE(r.iterations_run, 3);
    for (std::size_t i = 0; i < x.size(); ++i) {
      ASSERT_EQ(r.x_adv.data[i], std::clamp(x.data[i] + r.gamma.data[i], 0.0, 1.0));
    }
  }
}

TEST(LgpAttack, Deterministic) {
  ToyDetector det;
  auto [x, gts] = render_scene(random_scene(7));
  const AEResult a = lgp_attack(det, x, gts, AttackConfig{});
  const AEResult b = lgp_attack(det, x, gts, AttackConfig{});
  EXPECT_EQ(a.x_adv, b.x_adv);
  EXPECT_EQ(a.iterations_run, b.iterations_run);
  EXPECT_EQ(a.succeeded, b.succeeded);
}

TEST(LgpAttack, UnreachableObjectRaisesNoTargets) {
  ToyDetector det;
  auto [x, gts] = render_scene(three_objects());
  // A GT in an empty corner, too small for any anchor box to overlap it by 0.1.
  const GroundTruthSet far = {{0, make_hbb(2, 126, 1, 1), 0}};
  EXPECT_THROW(lgp_attack(det, x, far, AttackConfig{}), NoTargetsError);
}

TEST(LgpAttack, RejectsBadConfig) {
  ToyDetector det;
  auto [x, gts] = render_scene(three_objects());
  AttackConfig cfg;
  cfg.max_iters = -1;
  EXPECT_THROW(lgp_attack(det, x, gts, cfg), ConfigError);
  cfg = {};
  cfg.optimizer.learning_rate = 0.0;
  EXPECT_THROW(lgp_attack(det, x, gts, cfg), ConfigError);
  cfg = {};
  cfg.optimizer.name = "sgd";
  EXPECT_THROW(lgp_attack(det, x, gts, cfg), ConfigError);
}

TEST(LgpAttack, AlternativeModesRun) {
  ToyDetector det;
  auto [x, gts] = render_scene(three_objects());
  for (const auto mode : {DistanceMode::kImage, DistanceMode::kImageL2, DistanceMode::kStaticHeatmap}) {
    AttackConfig cfg;
    cfg.distance = mode;
    const AEResult r = lgp_attack(det, x, gts, cfg);
    EXPECT_TRUE(in_range(r.x_adv));
  }
  for (const auto src : {TargetSource::kPreNms, TargetSource::kPredictions}) {
    AttackConfig cfg;
    cfg.target_source = src;
    const AEResult r = lgp_attack(det, x, gts, cfg);
    EXPECT_GT(r.num_targets, 0u);
  }
  AttackConfig cfg;
  cfg.gt_source = GtSource::kCleanPredictions;
  cfg.optimizer.name = "adam";
  const AEResult r = lgp_attack(det, x, {}, cfg);
  EXPECT_EQ(r.succeeded.size(), 3u);
  EXPECT_EQ(r.optimizer, "adam");
}

TEST(LgpAttack, NoBackgroundDetector) {
  ToyDetectorOptions opt;
  opt.background_logit = false;
  ToyDetector det(opt);
  auto [x, gts] = render_scene(three_objects());
  const AEResult r = lgp_attack(det, x, gts, AttackConfig{});
  EXPECT_EQ(r.succeeded.size(), 3u);
}

TEST(Optimizer, AdamaxFirstStepIsLearningRateTimesSign) {
  Optimizer opt(OptimizerConfig{"adamax", 0.1});
  std::vector<double> p = {0.0, 0.0, 0.0};
  opt.step(p, {2.0, -0.5, 0.0});
  EXPECT_NEAR(p[0], -0.1, 1e-7);
  EXPECT_NEAR(p[1], 0.1, 1e-7);
  EXPECT_EQ(p[2], 0.0);
}

TEST(Optimizer, AdamFirstStepIsLearningRateTimesSign) {
  Optimizer opt(OptimizerConfig{"adam", 0.01});
  std::vector<double> p = {1.0, 1.0};
  opt.step(p, {3.0, -3.0});
  EXPECT_NEAR(p[0], 0.99, 1e-7);
  EXPECT_NEAR(p[1], 1.01, 1e-7);
}

TEST(Optimizer, MinimizesQuadratic) {
  for (const char* name : {"adamax", "adam"}) {
    Optimizer opt(OptimizerConfig{name, 0.05});
    std::vector<double> p = {3.0, -2.0};
    for (int i = 0; i < 2000; ++i) opt.step(p, {2.0 * (p[0] - 1.0), 2.0 * (p[1] + 0.5)});
    EXPECT_NEAR(p[0], 1.0, 1e-2) << name;
    EXPECT_NEAR(p[1], -0.5, 1e-2) << name;
  }
  EXPECT_THROW(Optimizer(OptimizerConfig{"rmsprop"}), ConfigError);
}

TEST(Pgd, ZeroBudgetIsIdentity) {
  ToyDetector det;
  auto [x, gts] = render_scene(three_objects());
  PgdConfig cfg;
  cfg.eps = 0.0;
  const AEResult r = pgd_attack(det, x, gts, cfg);
  EXPECT_EQ(r.x_adv, x);
  EXPECT_EQ(linf_norm(r.gamma), 0.0);
}

TEST(Pgd, BudgetIsExactAndNeverExceeded) {
  ToyDetector det;
  for (const auto mode : {PgdMode::kCls, PgdMode::kReg}) {
    for (std::uint64_t s = 0; s < 3; ++s) {
      auto [x, gts] = render_scene(random_scene(s));
      PgdConfig cfg;
      cfg.mode = mode;
      const AEResult r = pgd_attack(det, x, gts, cfg);
      EXPECT_NEAR(linf_norm(r.gamma), 8.0 / 255.0, 1e-9);
      EXPECT_LE(linf_norm(r.gamma), 8.0 / 255.0);
      ASSERT_EQ(r.trace.size(), 20u);
      for (const auto& t : r.trace) EXPECT_LE(t.gamma_linf, 8.0 / 255.0);
      EXPECT_TRUE(in_range(r.x_adv));
    }
  }
}

TEST(Pgd, ClsLowersTargetScores) {
  ToyDetector det;
  auto [x, gts] = render_scene(three_objects());
  const TargetSet t = assign_original_targets(det.detect_raw(x), gts);
  auto mean_score = [&](const Image& img) {
    const auto props = det.detect_raw(img);
    double s = 0.0;
    for (const auto& r : t.records) s += props[r.origin_index].score;
    return s / static_cast<double>(t.records.size());
  };
  const AEResult r = pgd_attack(det, x, gts, PgdConfig{});
  EXPECT_LT(mean_score(r.x_adv), mean_score(x));
}

TEST(Pgd, RejectsNegativeBudget) {
  ToyDetector det;
  auto [x, gts] = render_scene(three_objects());
  PgdConfig cfg;
  cfg.eps = -1.0;
  EXPECT_THROW(pgd_attack(det, x, gts, cfg), ConfigError);
}

}  // namespace
}  // namespace lgp
