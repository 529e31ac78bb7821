#pragma once

// Trackable target assignment: a fixed per-object quota of clean-image
// proposals, re-matched one-to-one against each new set of raw outputs.

#include <cstddef>
#include <vector>

#include "lgp/types.hpp"

namespace lgp {

struct TargetRecord {
  int gt_id = 0;
  std::size_t origin_index = 0;
  Proposal origin;
  double origin_iou = 0.0;  // IoU of the origin proposal with its GT
  std::size_t current_index = 0;
  Proposal current;
};

/// gt_ids lists every object handed to the assigner, including those that
/// received no proposal; records are grouped by GT in gt_ids order.
struct TargetSet {
  std::vector<int> gt_ids;
  std::vector<TargetRecord> records;

  std::size_t count_for(int gt_id) const;
  std::vector<const TargetRecord*> records_for(int gt_id) const;
  bool empty() const { return records.empty(); }
};

struct AssignOptions {
  int n_i = 5;
  int n_s = 5;
  double iou_floor = 0.1;
};

/// Top-n_i proposals by IoU plus top-n_s by score, among proposals whose IoU
/// with the GT exceeds the floor. A proposal wanted by several GTs goes to
/// the one it overlaps most (then the smaller id).
TargetSet assign_original_targets(const ProposalSet& b_pre, const GroundTruthSet& gts,
                                  const AssignOptions& options = {});

/// Quota-free variant: each listed proposal goes to the GT it overlaps most,
/// provided that IoU exceeds the floor.
TargetSet assign_all_targets(const ProposalSet& b_pre, const GroundTruthSet& gts,
                             const std::vector<std::size_t>& candidates, double iou_floor);

/// Greedy one-to-one re-matching of every origin record to b_pre_i. Records
/// are visited by descending origin IoU; each takes the free proposal with
/// the highest IoU against its origin box (ties: higher score, lower index).
TargetSet track_targets(const ProposalSet& b_pre_i, const TargetSet& t_org);

}  // namespace lgp
