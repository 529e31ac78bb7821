#include "lgp/report.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "lgp/errors.hpp"

namespace lgp {

using nlohmann::json;
using ordered = nlohmann::ordered_json;

AggregateReport aggregate_images(const std::vector<ImageReport>& images) {
  AggregateReport agg;
  agg.images = images.size();
  std::vector<DetectionSet> clean;
  std::vector<DetectionSet> adv;
  std::vector<GroundTruthSet> gts;
  double psnr_sum = 0.0, psnr_b_sum = 0.0;
  std::size_t psnr_n = 0, psnr_b_n = 0;
  for (const auto& im : images) {
    agg.objects += im.gts.size();
    agg.hidden += im.succeeded.size();
    agg.n_t += im.adv.n_t;
    agg.clean_n75 += im.clean.n75;
    agg.n75 += im.adv.n75;
    if (im.adv.psnr) {
      psnr_sum += *im.adv.psnr;
      ++psnr_n;
    }
    if (im.adv.psnr_b) {
      psnr_b_sum += *im.adv.psnr_b;
      ++psnr_b_n;
    }
    agg.mean_gamma_linf += im.gamma_linf;
    clean.push_back(im.clean_detections);
    adv.push_back(im.adv_detections);
    gts.push_back(im.gts);
  }
  if (!images.empty()) agg.mean_gamma_linf /= static_cast<double>(images.size());
  agg.clean_map50 = map50(clean, gts);
  agg.map50 = map50(adv, gts);
  if (psnr_n) agg.psnr = psnr_sum / static_cast<double>(psnr_n);
  if (psnr_b_n) agg.psnr_b = psnr_b_sum / static_cast<double>(psnr_b_n);
  return agg;
}

namespace {

ordered opt(const std::optional<double>& v) { return v ? ordered(*v) : ordered(nullptr); }

std::optional<double> get_opt(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

ordered box_json(const Box& b) {
  return ordered{{"cx", b.cx}, {"cy", b.cy},         {"w", b.w},
                 {"h", b.h},   {"theta", b.theta}, {"kind", b.kind == BoxKind::kObb ? "obb" : "hbb"}};
}

Box box_from(const json& j) {
  Box b;
  b.cx = j.at("cx").get<double>();
  b.cy = j.at("cy").get<double>();
  b.w = j.at("w").get<double>();
  b.h = j.at("h").get<double>();
  b.theta = j.at("theta").get<double>();
  const auto kind = j.at("kind").get<std::string>();
  if (kind != "hbb" && kind != "obb") throw IngestionError("unknown box kind '" + kind + "'");
  b.kind = kind == "obb" ? BoxKind::kObb : BoxKind::kHbb;
  return b;
}

ordered metrics_json(const MetricReport& m) {
  return ordered{{"map50", opt(m.map50)},
                 {"n_t", m.n_t},
                 {"n75", m.n75},
                 {"psnr", opt(m.psnr)},
                 {"psnr_b", opt(m.psnr_b)}};
}

MetricReport metrics_from(const json& j) {
  MetricReport m;
  m.map50 = get_opt(j.at("map50"));
  m.n_t = j.at("n_t").get<std::size_t>();
  m.n75 = j.at("n75").get<std::size_t>();
  m.psnr = get_opt(j.at("psnr"));
  m.psnr_b = get_opt(j.at("psnr_b"));
  return m;
}

ordered dets_json(const DetectionSet& dets) {
  ordered arr = ordered::array();
  for (const auto& d : dets) {
    arr.push_back(ordered{{"box", box_json(d.box)}, {"label", d.label}, {"score", d.score}});
  }
  return arr;
}

DetectionSet dets_from(const json& j) {
  DetectionSet out;
  for (const auto& d : j) {
    out.push_back({box_from(d.at("box")), d.at("label").get<int>(), d.at("score").get<double>()});
  }
  return out;
}

}  // namespace

std::string report_to_json(const RunReport& r) {
  ordered images = ordered::array();
  for (const auto& im : r.images) {
    ordered gts = ordered::array();
    for (const auto& g : im.gts) {
      gts.push_back(ordered{{"id", g.id}, {"box", box_json(g.box)}, {"label", g.label}});
    }
    images.push_back(ordered{{"name", im.name},
                             {"clean", metrics_json(im.clean)},
                             {"adv", metrics_json(im.adv)},
                             {"attack",
                              ordered{{"iterations_run", im.iterations_run},
                                      {"num_targets", im.num_targets},
                                      {"succeeded", im.succeeded},
                                      {"optimizer", im.optimizer},
                                      {"gamma_linf", im.gamma_linf},
                                      {"gamma_l2", im.gamma_l2}}},
                             {"gts", gts},
                             {"clean_detections", dets_json(im.clean_detections)},
                             {"adv_detections", dets_json(im.adv_detections)}});
  }
  const auto& a = r.aggregate;
  ordered doc{{"schema", r.schema},
              {"tool_version", r.tool_version},
              {"seed", r.seed},
              {"config", r.config},
              {"aggregate",
               ordered{{"images", a.images},
                       {"objects", a.objects},
                       {"hidden", a.hidden},
                       {"clean_map50", opt(a.clean_map50)},
                       {"map50", opt(a.map50)},
                       {"n_t", a.n_t},
                       {"clean_n75", a.clean_n75},
                       {"n75", a.n75},
                       {"psnr", opt(a.psnr)},
                       {"psnr_b", opt(a.psnr_b)},
                       {"mean_gamma_linf", a.mean_gamma_linf}}},
              {"images", images}};
  return doc.dump(2) + "\n";
}

RunReport report_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    RunReport r;
    r.schema = doc.at("schema").get<int>();
    if (r.schema != kReportSchema) {
      throw IngestionError("unsupported report schema " + std::to_string(r.schema));
    }
    r.tool_version = doc.at("tool_version").get<std::string>();
    r.seed = doc.at("seed").get<std::uint64_t>();
    r.config = doc.at("config").get<ConfigMap>();
    const auto& a = doc.at("aggregate");
    r.aggregate.images = a.at("images").get<std::size_t>();
    r.aggregate.objects = a.at("objects").get<std::size_t>();
    r.aggregate.hidden = a.at("hidden").get<std::size_t>();
    r.aggregate.clean_map50 = get_opt(a.at("clean_map50"));
    r.aggregate.map50 = get_opt(a.at("map50"));
    r.aggregate.n_t = a.at("n_t").get<std::size_t>();
    r.aggregate.clean_n75 = a.at("clean_n75").get<std::size_t>();
    r.aggregate.n75 = a.at("n75").get<std::size_t>();
    r.aggregate.psnr = get_opt(a.at("psnr"));
    r.aggregate.psnr_b = get_opt(a.at("psnr_b"));
    r.aggregate.mean_gamma_linf = a.at("mean_gamma_linf").get<double>();
    for (const auto& j : doc.at("images")) {
      ImageReport im;
      im.name = j.at("name").get<std::string>();
      im.clean = metrics_from(j.at("clean"));
      im.adv = metrics_from(j.at("adv"));
      const auto& at = j.at("attack");
      im.iterations_run = at.at("iterations_run").get<int>();
      im.num_targets = at.at("num_targets").get<std::size_t>();
      im.succeeded = at.at("succeeded").get<std::vector<int>>();
      im.optimizer = at.at("optimizer").get<std::string>();
      im.gamma_linf = at.at("gamma_linf").get<double>();
      im.gamma_l2 = at.at("gamma_l2").get<double>();
      for (const auto& g : j.at("gts")) {
        im.gts.push_back({g.at("id").get<int>(), box_from(g.at("box")), g.at("label").get<int>()});
      }
      im.clean_detections = dets_from(j.at("clean_detections"));
      im.adv_detections = dets_from(j.at("adv_detections"));
      r.images.push_back(std::move(im));
    }
    return r;
  } catch (const json::exception& e) {
    throw IngestionError(std::string("malformed report: ") + e.what());
  }
}

void write_report(const std::string& path, const RunReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << report_to_json(report);
  if (!out) throw IoError("write failed: " + path);
}

RunReport read_report(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return report_from_json(ss.str());
  } catch (const IngestionError& e) {
    throw IngestionError(path + ": " + e.what());
  }
}

}  // namespace lgp
