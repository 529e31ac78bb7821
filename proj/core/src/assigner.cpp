#include "lgp/assigner.hpp"

#include <algorithm>
#include <numeric>

#include "lgp/errors.hpp"

namespace lgp {

std::size_t TargetSet::count_for(int gt_id) const {
  return static_cast<std::size_t>(std::count_if(
      records.begin(), records.end(), [gt_id](const auto& r) { return r.gt_id == gt_id; }));
}

std::vector<const TargetRecord*> TargetSet::records_for(int gt_id) const {
  std::vector<const TargetRecord*> out;
  for (const auto& r : records) {
    if (r.gt_id == gt_id) out.push_back(&r);
  }
  return out;
}

namespace {

struct Claim {
  std::size_t gt_pos;
  double iou;
};

TargetSet finalize(const ProposalSet& b_pre, const GroundTruthSet& gts,
                   const std::vector<std::vector<std::size_t>>& wanted,
                   const std::vector<std::vector<double>>& ious) {
  // Resolve proposals wanted by several GTs.
  std::vector<int> owner(b_pre.size(), -1);
  for (std::size_t g = 0; g < gts.size(); ++g) {
    for (const std::size_t p : wanted[g]) {
      const int cur = owner[p];
      if (cur < 0) {
        owner[p] = static_cast<int>(g);
        continue;
      }
      const double a = ious[g][p];
      const double b = ious[static_cast<std::size_t>(cur)][p];
      if (a > b || (a == b && gts[g].id < gts[static_cast<std::size_t>(cur)].id)) {
        owner[p] = static_cast<int>(g);
      }
    }
  }
  TargetSet out;
  for (std::size_t g = 0; g < gts.size(); ++g) {
    out.gt_ids.push_back(gts[g].id);
    std::vector<std::size_t> mine;
    for (const std::size_t p : wanted[g]) {
      if (owner[p] == static_cast<int>(g)) mine.push_back(p);
    }
    std::sort(mine.begin(), mine.end(), [&](std::size_t a, std::size_t b) {
      if (ious[g][a] != ious[g][b]) return ious[g][a] > ious[g][b];
      return a < b;
    });
    for (const std::size_t p : mine) {
      TargetRecord r;
      r.gt_id = gts[g].id;
      r.origin_index = p;
      r.origin = b_pre[p];
      r.origin_iou = ious[g][p];
      r.current_index = p;
      r.current = b_pre[p];
      out.records.push_back(std::move(r));
    }
  }
  return out;
}

std::vector<std::vector<double>> iou_table(const ProposalSet& b_pre, const GroundTruthSet& gts) {
  std::vector<std::vector<double>> ious(gts.size(), std::vector<double>(b_pre.size()));
  for (std::size_t g = 0; g < gts.size(); ++g) {
    for (std::size_t p = 0; p < b_pre.size(); ++p) ious[g][p] = iou(b_pre[p].box, gts[g].box);
  }
  return ious;
}

}  // namespace

TargetSet assign_original_targets(const ProposalSet& b_pre, const GroundTruthSet& gts,
                                  const AssignOptions& options) {
  if (options.n_i < 0 || options.n_s < 0 || options.n_i + options.n_s < 1) {
    throw InvalidArgument("assigner quotas must be non-negative with a positive sum");
  }
  const auto ious = iou_table(b_pre, gts);
  std::vector<std::vector<std::size_t>> wanted(gts.size());
  for (std::size_t g = 0; g < gts.size(); ++g) {
    std::vector<std::size_t> cand;
    for (std::size_t p = 0; p < b_pre.size(); ++p) {
      if (ious[g][p] > options.iou_floor) cand.push_back(p);
    }
    auto by_iou = cand;
    std::stable_sort(by_iou.begin(), by_iou.end(),
                     [&](std::size_t a, std::size_t b) { return ious[g][a] > ious[g][b]; });
    auto by_score = cand;
    std::stable_sort(by_score.begin(), by_score.end(),
                     [&](std::size_t a, std::size_t b) { return b_pre[a].score > b_pre[b].score; });
    by_iou.resize(std::min<std::size_t>(by_iou.size(), static_cast<std::size_t>(options.n_i)));
    by_score.resize(std::min<std::size_t>(by_score.size(), static_cast<std::size_t>(options.n_s)));
    auto& w = wanted[g];
    w = by_iou;
    for (const std::size_t p : by_score) {
      if (std::find(w.begin(), w.end(), p) == w.end()) w.push_back(p);
    }
  }
  return finalize(b_pre, gts, wanted, ious);
}

TargetSet assign_all_targets(const ProposalSet& b_pre, const GroundTruthSet& gts,
                             const std::vector<std::size_t>& candidates, double iou_floor) {
  const auto ious = iou_table(b_pre, gts);
  std::vector<std::vector<std::size_t>> wanted(gts.size());
  for (std::size_t g = 0; g < gts.size(); ++g) {
    for (const std::size_t p : candidates) {
      if (ious[g][p] > iou_floor) wanted[g].push_back(p);
    }
  }
  return finalize(b_pre, gts, wanted, ious);
}

TargetSet track_targets(const ProposalSet& b_pre_i, const TargetSet& t_org) {
  if (b_pre_i.size() < t_org.records.size()) {
    throw TrackingError("cannot track " + std::to_string(t_org.records.size()) + " targets in " +
                        std::to_string(b_pre_i.size()) + " proposals");
  }
  std::vector<std::size_t> order(t_org.records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return t_org.records[a].origin_iou > t_org.records[b].origin_iou;
  });

  TargetSet out = t_org;
  std::vector<bool> taken(b_pre_i.size(), false);
  for (const std::size_t r : order) {
    const Box& origin = t_org.records[r].origin.box;
    std::size_t best = b_pre_i.size();
    double best_iou = -1.0;
    for (std::size_t p = 0; p < b_pre_i.size(); ++p) {
      if (taken[p]) continue;
      const double v = iou(origin, b_pre_i[p].box);
      if (v > best_iou || (v == best_iou && b_pre_i[p].score > b_pre_i[best].score)) {
        best = p;
        best_iou = v;
      }
    }
    taken[best] = true;
    out.records[r].current_index = best;
    out.records[r].current = b_pre_i[best];
  }
  return out;
}

}  // namespace lgp
