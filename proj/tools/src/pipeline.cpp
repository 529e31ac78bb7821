#include "lgp_tools/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <iostream>

#include "lgp/errors.hpp"
#include "lgp/image_io.hpp"
#include "lgp/scene.hpp"
#include "lgp/version.hpp"

namespace lgp::tools {

std::vector<ImageJob> demo_jobs(std::uint64_t seed, int scenes) {
  if (scenes < 0) throw ConfigError("scene count must be >= 0");
  std::vector<ImageJob> jobs;
  for (int i = 0; i < scenes; ++i) {
    auto [img, gts] = render_scene(random_scene(seed + static_cast<std::uint64_t>(i)));
    char name[32];
    std::snprintf(name, sizeof name, "scene_%03d", i);
    jobs.push_back({name, std::move(img), std::move(gts)});
  }
  return jobs;
}

ImageReport evaluate_image(const DetectorAdapter& adapter, const ToolConfig& cfg,
                           const std::string& name, const Image& x, const Image& x_adv,
                           const GroundTruthSet& gts) {
  ImageReport r;
  r.name = name;
  r.gts = gts;
  r.clean_detections = detect_final(adapter, x, cfg.eval_nms_iou, cfg.eval_score_min);
  r.adv_detections = x_adv == x ? r.clean_detections
                                : detect_final(adapter, x_adv, cfg.eval_nms_iou, cfg.eval_score_min);
  r.clean.map50 = map50(r.clean_detections, gts);
  r.clean.n75 = count_n75(r.clean_detections, gts);
  r.adv.map50 = map50(r.adv_detections, gts);
  r.adv.n75 = count_n75(r.adv_detections, gts);
  r.adv.psnr = psnr(x, x_adv);
  r.adv.psnr_b = psnr_b(x, x_adv);
  double sq = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x_adv.data[i] - x.data[i];
    r.gamma_linf = std::max(r.gamma_linf, std::abs(d));
    sq += d * d;
  }
  r.gamma_l2 = std::sqrt(sq);
  return r;
}

JobOutput attack_image(const DetectorAdapter& adapter, const ToolConfig& cfg, const ImageJob& job,
                       bool from_png) {
  const auto t0 = std::chrono::steady_clock::now();
  JobOutput out;
  try {
    out.result = cfg.method == "lgp" ? lgp_attack(adapter, job.image, job.gts, cfg.attack)
                                     : pgd_attack(adapter, job.image, job.gts, make_pgd_config(cfg));
  } catch (const NoTargetsError& e) {
    std::cerr << "warning: " << job.name << ": " << e.what() << "; left unattacked\n";
    out.result.x_adv = job.image;
    out.result.gamma = Image(job.image.height, job.image.width);
    out.result.optimizer = cfg.attack.optimizer.name;
  }
  const Image x_eval = from_png ? quantize8(out.result.x_adv) : out.result.x_adv;
  out.report = evaluate_image(adapter, cfg, job.name, job.image, x_eval, job.gts);
  out.report.clean.n_t = out.result.num_targets;
  out.report.adv.n_t = out.result.num_targets;
  out.report.iterations_run = out.result.iterations_run;
  out.report.num_targets = out.result.num_targets;
  out.report.succeeded = out.result.succeeded;
  out.report.optimizer = out.result.optimizer;
  out.report.gamma_linf = linf_norm(out.result.gamma);
  double sq = 0.0;
  for (const double v : out.result.gamma.data) sq += v * v;
  out.report.gamma_l2 = std::sqrt(sq);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

std::vector<JobOutput> attack_all(const ToolConfig& cfg, const std::vector<ImageJob>& jobs,
                                  int workers, bool from_png) {
  return parallel_map(cfg, jobs.size(), workers, [&](const DetectorAdapter& adapter, std::size_t i) {
    return attack_image(adapter, cfg, jobs[i], from_png);
  });
}

RunReport make_report(const ToolConfig& cfg, std::vector<ImageReport> images) {
  RunReport r;
  r.tool_version = kVersion;
  r.seed = cfg.attack.seed;
  r.config = config_snapshot(cfg);
  r.aggregate = aggregate_images(images);
  r.images = std::move(images);
  return r;
}

}  // namespace lgp::tools
