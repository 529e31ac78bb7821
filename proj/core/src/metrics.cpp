#include "lgp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <utility>

#include "lgp/errors.hpp"

namespace lgp {

namespace {

// Extended-precision all-point AP; rounding once at the end keeps rational
// results such as 5/6 exact in double.
long double envelope_area(const std::vector<long double>& recall, std::vector<long double> precision) {
  const std::size_t n = recall.size();
  for (std::size_t i = n; i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);
  long double ap = 0.0L;
  long double prev_recall = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    ap += (recall[i] - prev_recall) * precision[i];
    prev_recall = recall[i];
  }
  return ap;
}

}  // namespace

double average_precision(const std::vector<double>& recall, const std::vector<double>& precision) {
  if (recall.size() != precision.size()) {
    throw InvalidArgument("recall and precision lengths differ");
  }
  return static_cast<double>(envelope_area({recall.begin(), recall.end()}, {precision.begin(), precision.end()}));
}

std::optional<double> map50(const std::vector<DetectionSet>& dets,
                            const std::vector<GroundTruthSet>& gts, double iou_thresh) {
  if (dets.size() != gts.size()) throw InvalidArgument("detections and GTs cover different images");

  std::map<int, std::size_t> gt_count;
  for (const auto& image : gts) {
    for (const auto& g : image) ++gt_count[g.label];
  }
  if (gt_count.empty()) return std::nullopt;

  struct Entry {
    double score;
    std::size_t image;
    std::size_t det;
  };

  long double sum = 0.0L;
  for (const auto& [label, n_gt] : gt_count) {
    std::vector<Entry> entries;
    for (std::size_t i = 0; i < dets.size(); ++i) {
      for (std::size_t d = 0; d < dets[i].size(); ++d) {
        if (dets[i][d].label == label) entries.push_back({dets[i][d].score, i, d});
      }
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& a, const Entry& b) { return a.score > b.score; });

    std::set<std::pair<std::size_t, std::size_t>> matched;
    std::vector<long double> recall;
    std::vector<long double> precision;
    std::size_t tp = 0;
    for (std::size_t k = 0; k < entries.size(); ++k) {
      const auto& e = entries[k];
      const Box& box = dets[e.image][e.det].box;
      double best = -1.0;
      std::size_t best_gt = 0;
      for (std::size_t g = 0; g < gts[e.image].size(); ++g) {
        const auto& gt = gts[e.image][g];
        if (gt.label != label) continue;
        const double v = iou(box, gt.box);
        if (v > best) {
          best = v;
          best_gt = g;
        }
      }
      if (best >= iou_thresh && matched.insert({e.image, best_gt}).second) ++tp;
      recall.push_back(static_cast<long double>(tp) / static_cast<long double>(n_gt));
      precision.push_back(static_cast<long double>(tp) / static_cast<long double>(k + 1));
    }
    sum += envelope_area(recall, std::move(precision));
  }
  return static_cast<double>(sum / static_cast<long double>(gt_count.size()));
}

std::optional<double> map50(const DetectionSet& dets, const GroundTruthSet& gts) {
  return map50(std::vector<DetectionSet>{dets}, std::vector<GroundTruthSet>{gts});
}

std::size_t count_n75(const DetectionSet& dets, const GroundTruthSet& gts) {
  return static_cast<std::size_t>(std::count_if(dets.begin(), dets.end(), [&](const Detection& d) {
    return std::any_of(gts.begin(), gts.end(),
                       [&](const GroundTruthObject& g) { return iou(d.box, g.box) >= 0.75; });
  }));
}

std::size_t count_initial_targets(const TargetSet& t_org) { return t_org.records.size(); }

std::vector<double> luminance(const Image& img) {
  std::vector<double> y(static_cast<std::size_t>(img.height) * img.width);
  for (std::size_t p = 0; p < y.size(); ++p) {
    const double* px = &img.data[p * Image::kChannels];
    y[p] = 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
  }
  return y;
}

namespace {

double luma_mse(const Image& x, const Image& x_adv) {
  if (!x.same_shape(x_adv)) throw InvalidArgument("images differ in shape");
  const auto a = luminance(x);
  const auto b = luminance(x_adv);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return acc / static_cast<double>(a.size());
}

}  // namespace

std::optional<double> psnr(const Image& x, const Image& x_adv) {
  const double mse = luma_mse(x, x_adv);
  if (x == x_adv || mse == 0.0) return std::nullopt;
  return 10.0 * std::log10(1.0 / mse);
}

double blocking_effect_factor(const std::vector<double>& luma, int height, int width, int block) {
  if (block < 2) throw InvalidArgument("block size must be >= 2");
  if (luma.size() != static_cast<std::size_t>(height) * width) {
    throw InvalidArgument("luma plane size mismatch");
  }
  double sum_b = 0.0;
  double sum_bc = 0.0;
  std::size_t n_b = 0;
  std::size_t n_bc = 0;
  auto px = [&](int y, int x) { return luma[static_cast<std::size_t>(y) * width + x]; };
  // Horizontal neighbour pairs (x, x+1); a boundary pair straddles a block edge.
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x + 1 < width; ++x) {
      const double d = px(y, x) - px(y, x + 1);
      if ((x + 1) % block == 0) {
        sum_b += d * d;
        ++n_b;
      } else {
        sum_bc += d * d;
        ++n_bc;
      }
    }
  }
  for (int y = 0; y + 1 < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double d = px(y, x) - px(y + 1, x);
      if ((y + 1) % block == 0) {
        sum_b += d * d;
        ++n_b;
      } else {
        sum_bc += d * d;
        ++n_bc;
      }
    }
  }
  if (n_b == 0 || n_bc == 0) return 0.0;
  const double d_b = sum_b / static_cast<double>(n_b);
  const double d_bc = sum_bc / static_cast<double>(n_bc);
  if (d_b <= d_bc) return 0.0;
  const double eta = std::log2(static_cast<double>(block)) /
                     std::log2(static_cast<double>(std::min(height, width)));
  return eta * (d_b - d_bc);
}

std::optional<double> psnr_b(const Image& x, const Image& x_adv, int block) {
  const double mse = luma_mse(x, x_adv);
  if (x == x_adv || mse == 0.0) return std::nullopt;
  const double bef = blocking_effect_factor(luminance(x_adv), x_adv.height, x_adv.width, block);
  return 10.0 * std::log10(1.0 / (mse + bef));
}

}  // namespace lgp
