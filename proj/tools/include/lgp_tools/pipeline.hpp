#pragma once

// Per-image attack and evaluation, and a worker pool over images.

#include <cstdint>
#include <string>
#include <vector>

#include "lgp/attack_loop.hpp"
#include "lgp/config.hpp"
#include "lgp/report.hpp"

namespace lgp::tools {

struct ImageJob {
  std::string name;
  Image image;
  GroundTruthSet gts;
};

struct JobOutput {
  ImageReport report;
  AEResult result;
  double seconds = 0.0;
};

/// Scene i of a demo run is random_scene(seed + i).
std::vector<ImageJob> demo_jobs(std::uint64_t seed, int scenes);

/// Runs the configured method on one image and measures the outcome. With
/// `from_png` the adversarial image is quantized to 8 bits before scoring.
/// An image without usable targets is reported unattacked.
JobOutput attack_image(const DetectorAdapter& adapter, const ToolConfig& cfg, const ImageJob& job,
                       bool from_png);

/// Scores an already perturbed image (x_adv == x scores the clean image).
ImageReport evaluate_image(const DetectorAdapter& adapter, const ToolConfig& cfg,
                           const std::string& name, const Image& x, const Image& x_adv,
                           const GroundTruthSet& gts);

/// Applies `fn(adapter, index)` to every index in [0, n) on `workers`
/// threads. Adapters are shared when reentrant, otherwise one per worker.
/// Results keep index order.
template <class Fn>
auto parallel_map(const ToolConfig& cfg, std::size_t n, int workers, Fn fn)
    -> std::vector<decltype(fn(std::declval<const DetectorAdapter&>(), std::size_t{}))>;

std::vector<JobOutput> attack_all(const ToolConfig& cfg, const std::vector<ImageJob>& jobs,
                                  int workers, bool from_png);

RunReport make_report(const ToolConfig& cfg, std::vector<ImageReport> images);

}  // namespace lgp::tools

#include "lgp_tools/pipeline_impl.hpp"
