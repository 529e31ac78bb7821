#pragma once

// Run reports: per-image metrics and attack summaries plus an aggregate, with
// the detections and GTs needed to recompute the aggregate mAP.
//
// Reports carry no wall-clock data so that identical runs serialize to
// identical bytes.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lgp/config.hpp"
#include "lgp/metrics.hpp"

namespace lgp {

inline constexpr int kReportSchema = 1;

struct ImageReport {
  std::string name;
  MetricReport clean;
  MetricReport adv;
  int iterations_run = 0;
  std::size_t num_targets = 0;
  std::vector<int> succeeded;
  std::string optimizer;
  double gamma_linf = 0.0;
  double gamma_l2 = 0.0;
  GroundTruthSet gts;
  DetectionSet clean_detections;
  DetectionSet adv_detections;

  friend bool operator==(const ImageReport&, const ImageReport&) = default;
};

struct AggregateReport {
  std::size_t images = 0;
  std::size_t objects = 0;
  std::size_t hidden = 0;
  std::optional<double> clean_map50;
  std::optional<double> map50;
  std::size_t n_t = 0;
  std::size_t clean_n75 = 0;
  std::size_t n75 = 0;
  std::optional<double> psnr;    // mean over images with a finite value
  std::optional<double> psnr_b;  // likewise
  double mean_gamma_linf = 0.0;

  friend bool operator==(const AggregateReport&, const AggregateReport&) = default;
};

struct RunReport {
  int schema = kReportSchema;
  std::string tool_version;
  std::uint64_t seed = 0;
  ConfigMap config;
  std::vector<ImageReport> images;
  AggregateReport aggregate;

  friend bool operator==(const RunReport&, const RunReport&) = default;
};

AggregateReport aggregate_images(const std::vector<ImageReport>& images);

std::string report_to_json(const RunReport& report);
/// Throws IngestionError on malformed input or an unsupported schema.
RunReport report_from_json(const std::string& text);

void write_report(const std::string& path, const RunReport& report);
RunReport read_report(const std::string& path);

}  // namespace lgp
