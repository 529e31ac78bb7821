#include <gtest/gtest.h>

#include <set>

#include "lgp/assigner.hpp"
#include "lgp/errors.hpp"
#include "lgp/toy_detector.hpp"
#include "oracles.hpp"

namespace lgp {
namespace {

const DetectorMeta kMeta{true, BoxKind::kHbb, 2, 2};

// A proposal whose max foreground probability is roughly `score`.
Proposal prop(double cx, double cy, double w, double h, double score) {
  const double z = std::log(score / (1.0 - score));
  return make_proposal(make_hbb(cx, cy, w, h), {z, -30.0, 0.0}, kMeta);
}

std::set<std::size_t> origin_indices(const TargetSet& t, int gt_id) {
  std::set<std::size_t> out;
  for (const auto* r : t.records_for(gt_id)) out.insert(r->origin_index);
  return out;
}

TEST(Assign, FewerCandidatesThanQuota) {
  const GroundTruthSet gts = {{0, make_hbb(10, 10, 10, 10), 0}};
  const ProposalSet props = {prop(10, 10, 10, 10, 0.9), prop(11, 10, 10, 10, 0.5),
                             prop(10, 12, 9, 10, 0.2)};
  const TargetSet t = assign_original_targets(props, gts, {5, 5, 0.1});
  EXPECT_EQ(t.count_for(0), 3u);
  EXPECT_EQ(t.gt_ids, std::vector<int>{0});
}

TEST(Assign, OverlapOfIouAndScoreListsCountedOnce) {
  // Six proposals around one GT; IoU and score rankings overlap in index 0.
  const GroundTruthSet gts = {{0, make_hbb(20, 20, 10, 10), 0}};
  const ProposalSet props = {
      prop(20, 20, 10, 10, 0.95),  // best IoU, best score
      prop(21, 20, 10, 10, 0.30),  // 2nd IoU
      prop(22, 20, 10, 10, 0.90),  // 3rd IoU, 2nd score
      prop(23, 20, 10, 10, 0.80),  // 4th IoU, 3rd score
      prop(24, 20, 10, 10, 0.10),
      prop(60, 60, 10, 10, 0.99),  // disjoint: never eligible
  };
  // Brute-force enumeration of the rule: top-2 by IoU {0,1} and top-2 by
  // score among eligible {0,2}; union {0,1,2}.
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < props.size(); ++i) {
    if (iou(props[i].box, gts[0].box) > 0.1) eligible.push_back(i);
  }
  auto top = [&](auto key) {
    auto v = eligible;
    std::stable_sort(v.begin(), v.end(), [&](auto a, auto b) { return key(a) > key(b); });
    v.resize(2);
    return v;
  };
  const auto by_iou = top([&](std::size_t i) { return iou(props[i].box, gts[0].box); });
  const auto by_score = top([&](std::size_t i) { return props[i].score; });
  std::set<std::size_t> expected(by_iou.begin(), by_iou.end());
  expected.insert(by_score.begin(), by_score.end());

  const TargetSet t = assign_original_targets(props, gts, {2, 2, 0.1});
  EXPECT_EQ(origin_indices(t, 0), expected);
  EXPECT_EQ(expected, (std::set<std::size_t>{0, 1, 2}));
  EXPECT_EQ(t.records.size(), 3u);
}

TEST(Assign, ConflictGoesToHigherIou) {
  const GroundTruthSet gts = {{0, make_hbb(10, 10, 10, 10), 0}, {1, make_hbb(18, 10, 10, 10), 1}};
  // Centered at 13: IoU 0.53 with GT0, 0.25 with GT1.
  const ProposalSet props = {prop(13, 10, 10, 10, 0.9)};
  const TargetSet t = assign_original_targets(props, gts, {5, 5, 0.1});
  EXPECT_EQ(t.count_for(0), 1u);
  EXPECT_EQ(t.count_for(1), 0u);
  EXPECT_EQ(t.gt_ids, (std::vector<int>{0, 1}));
}

TEST(Assign, EqualIouConflictGoesToSmallerId) {
  const GroundTruthSet gts = {{7, make_hbb(18, 10, 10, 10), 0}, {3, make_hbb(10, 10, 10, 10), 1}};
  const ProposalSet props = {prop(14, 10, 10, 10, 0.9)};
  const TargetSet t = assign_original_targets(props, gts, {5, 5, 0.1});
  EXPECT_EQ(t.count_for(3), 1u);
  EXPECT_EQ(t.count_for(7), 0u);
}

TEST(Assign, FloorExcludesWeakOverlaps) {
  const GroundTruthSet gts = {{0, make_hbb(10, 10, 10, 10), 0}};
  // IoU with the GT is 1/19 < 0.1.
  const ProposalSet props = {prop(19, 10, 10, 10, 0.99)};
  EXPECT_TRUE(assign_original_targets(props, gts).empty());
}

TEST(Assign, EmptyProposalsGiveEmptySet) {
  const GroundTruthSet gts = {{0, make_hbb(10, 10, 10, 10), 0}};
  const TargetSet t = assign_original_targets({}, gts);
  EXPECT_TRUE(t.empty());
  EXPECT_EQ(t.gt_ids, std::vector<int>{0});
}

TEST(Assign, RejectsZeroQuota) {
  EXPECT_THROW(assign_original_targets({}, {}, {0, 0, 0.1}), InvalidArgument);
  EXPECT_THROW(assign_original_targets({}, {}, {-1, 3, 0.1}), InvalidArgument);
}

TEST(Assign, DefaultQuotaOnToyScenes) {
  ToyDetector det;
  for (std::uint64_t s = 0; s < 10; ++s) {
    auto [img, gts] = render_scene(random_scene(s));
    const auto props = det.detect_raw(img);
    const TargetSet t = assign_original_targets(props, gts);
    std::set<std::size_t> seen;
    for (const auto& g : gts) {
      EXPECT_LE(t.count_for(g.id), 10u);
      EXPECT_GE(t.count_for(g.id), 1u);
    }
    for (const auto& r : t.records) {
      EXPECT_TRUE(seen.insert(r.origin_index).second);
      EXPECT_GT(r.origin_iou, 0.1);
    }
  }
}

TEST(Track, IdentityOnOriginProposals) {
  ToyDetector det;
  auto [img, gts] = render_scene(random_scene(2));
  const auto props = det.detect_raw(img);
  const TargetSet t_org = assign_original_targets(props, gts);
  const TargetSet t = track_targets(props, t_org);
  ASSERT_EQ(t.records.size(), t_org.records.size());
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    EXPECT_EQ(t.records[i].current_index, t_org.records[i].origin_index);
    EXPECT_EQ(t.records[i].gt_id, t_org.records[i].gt_id);
    EXPECT_EQ(t.records[i].current.box, props[t_org.records[i].origin_index].box);
  }
  // Stable under repetition.
  const TargetSet again = track_targets(props, t_org);
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    EXPECT_EQ(again.records[i].current_index, t.records[i].current_index);
  }
}

TEST(Track, InjectiveAndGtPreserving) {
  ToyDetector det;
  auto [img, gts] = render_scene(random_scene(5));
  const TargetSet t_org = assign_original_targets(det.detect_raw(img), gts);
  auto [noisy, unused] = oracle::noisy_scene(5, 0.1);
  const TargetSet t = track_targets(det.detect_raw(noisy), t_org);
  std::set<std::size_t> used;
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    EXPECT_TRUE(used.insert(t.records[i].current_index).second);
    EXPECT_EQ(t.records[i].gt_id, t_org.records[i].gt_id);
    EXPECT_EQ(t.records[i].origin_index, t_org.records[i].origin_index);
  }
}

TEST(Track, TooFewProposalsRaises) {
  const GroundTruthSet gts = {{0, make_hbb(10, 10, 10, 10), 0}};
  const ProposalSet props = {prop(10, 10, 10, 10, 0.9), prop(11, 10, 10, 10, 0.8)};
  const TargetSet t_org = assign_original_targets(props, gts);
  EXPECT_THROW(track_targets({props[0]}, t_org), TrackingError);
}

TEST(Track, TieBreaksOnScoreThenIndex) {
  const GroundTruthSet gts = {{0, make_hbb(10, 10, 10, 10), 0}};
  const TargetSet t_org = assign_original_targets({prop(10, 10, 10, 10, 0.9)}, gts);
  // Two equally overlapping candidates: the higher score wins.
  const ProposalSet next = {prop(11, 10, 10, 10, 0.3), prop(9, 10, 10, 10, 0.6)};
  EXPECT_EQ(track_targets(next, t_org).records[0].current_index, 1u);
  // Equal scores too: the lower index wins.
  const ProposalSet same = {prop(11, 10, 10, 10, 0.6), prop(9, 10, 10, 10, 0.6)};
  EXPECT_EQ(track_targets(same, t_org).records[0].current_index, 0u);
}

TEST(Track, GreedyNearOptimalOnJitteredProposals) {
  Rng rng(77);
  for (int trial = 0; trial < 5; ++trial) {
    GroundTruthSet gts;
    ProposalSet origin;
    for (int g = 0; g < 2; ++g) {
      const double cx = 30 + 50 * g, cy = 40;
      gts.push_back({g, make_hbb(cx, cy, 20, 20), 0});
      for (int k = 0; k < 5; ++k) {
        origin.push_back(prop(cx + rng.uniform(-4, 4), cy + rng.uniform(-4, 4), rng.uniform(16, 24),
                              rng.uniform(16, 24), rng.uniform(0.3, 0.99)));
      }
    }
    const TargetSet t_org = assign_original_targets(origin, gts, {5, 5, 0.1});
    ASSERT_EQ(t_org.records.size(), 10u);

    ProposalSet next;
    for (int k = 0; k < 30; ++k) {
      const auto& base = origin[static_cast<std::size_t>(k % 10)].box;
      next.push_back(prop(base.cx + rng.uniform(-3, 3), base.cy + rng.uniform(-3, 3),
                          base.w * rng.uniform(0.8, 1.2), base.h * rng.uniform(0.8, 1.2),
                          rng.uniform(0.1, 0.99)));
    }
    const TargetSet t = track_targets(next, t_org);
    double greedy = 0.0;
    std::vector<std::vector<double>> w(t_org.records.size(), std::vector<double>(next.size()));
    for (std::size_t r = 0; r < t_org.records.size(); ++r) {
      greedy += iou(t_org.records[r].origin.box, next[t.records[r].current_index].box);
      for (std::size_t c = 0; c < next.size(); ++c) w[r][c] = iou(t_org.records[r].origin.box, next[c].box);
    }
    const double best = oracle::best_total_assignment(w);
    EXPECT_GE(greedy, 0.95 * best) << "trial " << trial;
  }
}

}  // namespace
}  // namespace lgp
