#include "lgp_tools/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "lgp/dataset.hpp"
#include "lgp/errors.hpp"
#include "lgp/image_io.hpp"
#include "lgp/report.hpp"
#include "lgp/toy_detector.hpp"
#include "lgp_tools/pipeline.hpp"

namespace lgp::tools {

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::string detector;
  std::string method;
  std::optional<double> eps;
  int jobs = 1;
  bool from_png = false;
};

struct DataOptions {
  std::string annotations;
  std::string format = "coco";
  std::string images;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool attack_flags) {
  cmd->add_option("--config", o.config_path, "key = value configuration file");
  cmd->add_option("--set", o.sets, "override one key, e.g. --set attack.max_iters=10");
  cmd->add_option("--seed", o.seed, "seed (overrides the file and LGP_SEED)");
  cmd->add_option("--detector", o.detector, "detector adapter name");
  cmd->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_flag("--from-png", o.from_png, "score the 8-bit quantized adversarial image");
  if (attack_flags) {
    cmd->add_option("--method", o.method, "lgp, pgd_cls or pgd_reg");
    cmd->add_option("--eps", o.eps, "pgd budget in 1/255 units");
  }
}

void add_data(CLI::App* cmd, DataOptions& d) {
  cmd->add_option("--annotations", d.annotations, "COCO json file or DOTA label file/directory")
      ->required();
  cmd->add_option("--format", d.format, "coco or dota")
      ->check(CLI::IsMember({"coco", "dota"}));
  cmd->add_option("--images", d.images, "image directory");
}

ToolConfig resolve_config(const CommonOptions& o, const std::string& dataset) {
  ConfigMap values;
  if (!o.config_path.empty()) values = load_config_file(o.config_path);
  if (!dataset.empty() && !values.count("run.dataset")) values["run.dataset"] = dataset;
  if (const char* env = std::getenv("LGP_SEED"); env && *env) values["run.seed"] = env;
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + s + "'");
    values[s.substr(0, eq)] = s.substr(eq + 1);
  }
  if (o.seed) values["run.seed"] = std::to_string(*o.seed);
  if (!o.detector.empty()) values["run.detector"] = o.detector;
  if (!o.method.empty()) values["run.method"] = o.method;

  ToolConfig cfg = default_tool_config("coco");
  apply_config(cfg, values);
  if (o.eps) {
    if (!(*o.eps >= 0.0)) throw ConfigError("--eps must be >= 0");
    cfg.budget = *o.eps;
  }
  validate_config(cfg.attack);
  AdapterRegistry::instance().create(cfg.detector);  // fails early on unknown names
  return cfg;
}

std::vector<DatasetRecord> load_records(const DataOptions& d) {
  if (d.format == "coco") return load_coco_annotations(d.annotations, d.images);
  return load_dota_annotations(d.annotations, d.images);
}

Image load_input_png(const std::string& path) {
  try {
    return read_png(path);
  } catch (const IoError& e) {
    throw IngestionError(e.what());
  }
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

void write_timing(const fs::path& dir, const std::vector<JobOutput>& outputs) {
  nlohmann::ordered_json doc;
  double total = 0.0;
  nlohmann::ordered_json per = nlohmann::ordered_json::array();
  for (const auto& o : outputs) {
    total += o.seconds;
    per.push_back({{"name", o.report.name}, {"seconds", o.seconds}});
  }
  doc["total_seconds"] = total;
  doc["images"] = per;
  std::ofstream out(dir / "timing.json");
  if (!out) throw IoError("cannot write " + (dir / "timing.json").string());
  out << doc.dump(2) << "\n";
}

void write_demo_dataset(const fs::path& dir, const std::vector<ImageJob>& jobs) {
  fs::create_directories(dir / "images");
  nlohmann::ordered_json images = nlohmann::ordered_json::array();
  nlohmann::ordered_json annotations = nlohmann::ordered_json::array();
  nlohmann::ordered_json categories = nlohmann::ordered_json::array();
  const char* names[] = {"red", "green", "blue", "yellow"};
  for (int c = 0; c < 4; ++c) categories.push_back({{"id", c}, {"name", names[c]}});
  int ann_id = 0;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const std::string file = jobs[i].name + ".png";
    write_png((dir / "images" / file).string(), jobs[i].image);
    images.push_back({{"id", i}, {"file_name", file}, {"height", jobs[i].image.height},
                      {"width", jobs[i].image.width}});
    for (const auto& g : jobs[i].gts) {
      annotations.push_back({{"id", ann_id++},
                             {"image_id", i},
                             {"category_id", g.label},
                             {"bbox", {g.box.cx - 0.5 * g.box.w, g.box.cy - 0.5 * g.box.h, g.box.w,
                                       g.box.h}}});
    }
  }
  std::ofstream out(dir / "annotations.json");
  if (!out) throw IoError("cannot write " + (dir / "annotations.json").string());
  out << nlohmann::ordered_json{{"images", images},
                                {"annotations", annotations},
                                {"categories", categories}}
             .dump(2)
      << "\n";
}

void print_summary(std::ostream& out, const RunReport& r) {
  auto show = [](const std::optional<double>& v) {
    std::ostringstream s;
    if (v) {
      s << std::fixed << std::setprecision(4) << *v;
    } else {
      s << "n/a";
    }
    return s.str();
  };
  const auto& a = r.aggregate;
  out << "images " << a.images << ", objects " << a.objects << ", hidden " << a.hidden << "\n"
      << "map50 " << show(a.clean_map50) << " -> " << show(a.map50) << ", n75 " << a.clean_n75
      << " -> " << a.n75 << ", n_t " << a.n_t << ", psnr_b " << show(a.psnr_b) << "\n";
}

int run_outputs(const ToolConfig& cfg, const std::vector<ImageJob>& jobs, const CommonOptions& o,
                const fs::path& out_dir, bool save_aes, std::ostream& out) {
  fs::create_directories(out_dir);
  const auto outputs = attack_all(cfg, jobs, o.jobs, o.from_png);
  std::vector<ImageReport> reports;
  for (const auto& r : outputs) {
    reports.push_back(r.report);
    if (save_aes) save_ae(r.result, (out_dir / "aes").string(), r.report.name);
  }
  const RunReport report = make_report(cfg, std::move(reports));
  write_report((out_dir / "report.json").string(), report);
  write_timing(out_dir, outputs);
  print_summary(out, report);
  return kExitOk;
}

std::optional<double> read_total_seconds(const std::string& report_path) {
  const fs::path timing = fs::path(report_path).parent_path() / "timing.json";
  std::ifstream in(timing);
  if (!in) return std::nullopt;
  try {
    const auto doc = nlohmann::json::parse(in);
    return doc.at("total_seconds").get<double>();
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
}

std::string compare_table(const std::vector<std::string>& paths) {
  std::ostringstream t;
  auto num = [](const std::optional<double>& v, int prec) {
    std::ostringstream s;
    if (v) {
      s << std::fixed << std::setprecision(prec) << *v;
    } else {
      s << "-";
    }
    return s.str();
  };
  t << "| report | method | budget | PSNR-B | mAP50 | N_T | N75 | time (s) |\n"
    << "|---|---|---|---|---|---|---|---|\n";
  for (const auto& p : paths) {
    const RunReport r = read_report(p);
    const auto method = r.config.count("run.method") ? r.config.at("run.method") : "?";
    std::string budget = "-";
    if (method != "lgp" && r.config.count("pgd.budget")) budget = r.config.at("pgd.budget");
    t << "| " << p << " | " << method << " | " << budget << " | " << num(r.aggregate.psnr_b, 2)
      << " | " << num(r.aggregate.map50, 3) << " | " << r.aggregate.n_t << " | " << r.aggregate.n75
      << " | " << num(read_total_seconds(p), 2) << " |\n";
  }
  return t.str();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Object-hiding adversarial attacks on detectors", "lgp"};
  app.require_subcommand(1);

  CommonOptions attack_opts, demo_opts, eval_opts;
  DataOptions attack_data, eval_data;
  std::string attack_out, demo_out, eval_out, eval_ae_dir, compare_out;
  std::optional<int> demo_scenes;
  std::optional<int> attack_limit;
  bool demo_save = false;
  std::vector<std::string> compare_paths;

  auto* attack = app.add_subcommand("attack", "attack every image of a dataset");
  add_common(attack, attack_opts, true);
  add_data(attack, attack_data);
  attack->add_option("--out", attack_out, "output directory")->required();
  attack->add_option("--limit", attack_limit, "attack only the first N images");

  auto* eval = app.add_subcommand("eval", "score saved adversarial examples or clean images");
  add_common(eval, eval_opts, false);
  add_data(eval, eval_data);
  eval->add_option("--ae-dir", eval_ae_dir, "directory written by attack/demo (aes/)");
  eval->add_option("--out", eval_out, "report path");

  auto* compare = app.add_subcommand("compare", "tabulate several reports side by side");
  compare->add_option("reports", compare_paths, "report.json files")->required();
  compare->add_option("--out", compare_out, "also write the table to this file");

  auto* demo = app.add_subcommand("demo", "attack synthetic scenes with the toy detector");
  add_common(demo, demo_opts, true);
  demo->add_option("--scenes", demo_scenes, "number of scenes")->check(CLI::NonNegativeNumber);
  demo->add_option("--out", demo_out, "output directory")->required();
  demo->add_flag("--save-aes", demo_save, "also write the scenes, annotations and AEs");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitConfig;
  }

  try {
    if (*demo) {
      ToolConfig cfg = resolve_config(demo_opts, "");
      if (demo_scenes) cfg.demo_scenes = *demo_scenes;
      const auto jobs = demo_jobs(cfg.attack.seed, cfg.demo_scenes);
      if (demo_save) write_demo_dataset(demo_out, jobs);
      return run_outputs(cfg, jobs, demo_opts, demo_out, demo_save, out);
    }
    if (*attack) {
      const ToolConfig cfg = resolve_config(attack_opts, attack_data.format);
      auto records = load_records(attack_data);
      if (attack_limit && *attack_limit >= 0 && static_cast<std::size_t>(*attack_limit) < records.size()) {
        records.resize(static_cast<std::size_t>(*attack_limit));
      }
      std::vector<ImageJob> jobs;
      for (const auto& rec : records) {
        ImageJob job{stem_of(rec.image_path), load_input_png(rec.image_path), rec.gts};
        try {
          validate_image(job.image);
        } catch (const InvalidArgument& e) {
          throw IngestionError(rec.image_path + ": " + e.what());
        }
        jobs.push_back(std::move(job));
      }
      return run_outputs(cfg, jobs, attack_opts, attack_out, true, out);
    }
    if (*eval) {
      const ToolConfig cfg = resolve_config(eval_opts, eval_data.format);
      const auto records = load_records(eval_data);
      const auto reports =
          parallel_map(cfg, records.size(), eval_opts.jobs, [&](const DetectorAdapter& adapter, std::size_t i) {
            const auto& rec = records[i];
            const std::string stem = stem_of(rec.image_path);
            const Image x = load_input_png(rec.image_path);
            Image x_adv = x;
            if (!eval_ae_dir.empty()) {
              const fs::path dir(eval_ae_dir);
              if (eval_opts.from_png) {
                x_adv = load_input_png((dir / (stem + "_adv.png")).string());
              } else {
                Image gamma;
                try {
                  gamma = read_gamma_sidecar((dir / (stem + ".lgpg")).string());
                } catch (const IoError& e) {
                  throw IngestionError(e.what());
                }
                if (!gamma.same_shape(x)) throw IngestionError(stem + ": perturbation shape mismatch");
                for (std::size_t k = 0; k < x.size(); ++k) {
                  x_adv.data[k] = std::clamp(x.data[k] + gamma.data[k], 0.0, 1.0);
                }
              }
              if (!x_adv.same_shape(x)) throw IngestionError(stem + ": adversarial image shape mismatch");
            }
            return evaluate_image(adapter, cfg, stem, x, x_adv, rec.gts);
          });
      const RunReport report = make_report(cfg, reports);
      if (!eval_out.empty()) write_report(eval_out, report);
      print_summary(out, report);
      return kExitOk;
    }
    if (*compare) {
      const std::string table = compare_table(compare_paths);
      out << table;
      if (!compare_out.empty()) {
        std::ofstream f(compare_out);
        if (!f) throw IoError("cannot write " + compare_out);
        f << table;
      }
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IngestionError& e) {
    err << "ingestion error: " << e.what() << "\n";
    return kExitIngestion;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitConfig;
}

}  // namespace lgp::tools
