#include "lgp/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "lgp/errors.hpp"

namespace lgp {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_double(const std::string& key, const std::string& s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError(key + ": expected a number, got '" + s + "'");
  }
  return v;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& s) {
  Int v{};
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw ConfigError(key + ": expected an integer, got '" + s + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + s + "'");
}

template <class E>
struct EnumName {
  E value;
  const char* name;
};

constexpr EnumName<DistanceMode> kDistanceNames[] = {{DistanceMode::kObjectWise, "object"},
                                                     {DistanceMode::kImage, "image"},
                                                     {DistanceMode::kImageL2, "image_l2"},
                                                     {DistanceMode::kStaticHeatmap, "static"}};
constexpr EnumName<TargetSource> kTargetNames[] = {{TargetSource::kAssigner, "assigner"},
                                                   {TargetSource::kPreNms, "pre_nms"},
                                                   {TargetSource::kPredictions, "predictions"}};
constexpr EnumName<GtSource> kGtNames[] = {{GtSource::kAnnotations, "annotations"},
                                           {GtSource::kCleanPredictions, "clean_predictions"}};

template <class E, std::size_t N>
std::string enum_to(const EnumName<E> (&names)[N], E v) {
  for (const auto& n : names) {
    if (n.value == v) return n.name;
  }
  return "?";
}

template <class E, std::size_t N>
E enum_from(const EnumName<E> (&names)[N], const std::string& key, const std::string& s) {
  for (const auto& n : names) {
    if (s == n.name) return n.value;
  }
  std::string allowed;
  for (const auto& n : names) allowed += std::string(allowed.empty() ? "" : ", ") + n.name;
  throw ConfigError(key + ": expected one of " + allowed + ", got '" + s + "'");
}

struct Field {
  std::function<std::string(const ToolConfig&)> get;
  std::function<void(ToolConfig&, const std::string& key, const std::string&)> set;
};

#define LGP_REAL(member)                                                                  \
  Field {                                                                                 \
    [](const ToolConfig& c) { return fmt(c.member); },                                    \
        [](ToolConfig& c, const std::string& k, const std::string& v) {                   \
          c.member = parse_double(k, v);                                                  \
        }                                                                                 \
  }
#define LGP_INT(member)                                                                   \
  Field {                                                                                 \
    [](const ToolConfig& c) { return std::to_string(c.member); },                         \
        [](ToolConfig& c, const std::string& k, const std::string& v) {                   \
          c.member = parse_int<decltype(c.member)>(k, v);                                 \
        }                                                                                 \
  }
#define LGP_BOOL(member)                                                                  \
  Field {                                                                                 \
    [](const ToolConfig& c) { return std::string(c.member ? "true" : "false"); },         \
        [](ToolConfig& c, const std::string& k, const std::string& v) {                   \
          c.member = parse_bool(k, v);                                                    \
        }                                                                                 \
  }
#define LGP_ENUM(member, names)                                                           \
  Field {                                                                                 \
    [](const ToolConfig& c) { return enum_to(names, c.member); },                         \
        [](ToolConfig& c, const std::string& k, const std::string& v) {                   \
          c.member = enum_from(names, k, v);                                              \
        }                                                                                 \
  }
#define LGP_CHOICE(member, ...)                                                           \
  Field {                                                                                 \
    [](const ToolConfig& c) { return c.member; },                                         \
        [](ToolConfig& c, const std::string& k, const std::string& v) {                   \
          for (const char* ok : {__VA_ARGS__}) {                                          \
            if (v == ok) {                                                                \
              c.member = v;                                                               \
              return;                                                                     \
            }                                                                             \
          }                                                                               \
          throw ConfigError(k + ": unsupported value '" + v + "'");                       \
        }                                                                                 \
  }

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = {
      {"run.dataset", LGP_CHOICE(dataset, "coco", "dota")},
      {"run.detector",
       Field{[](const ToolConfig& c) { return c.detector; },
             [](ToolConfig& c, const std::string& k, const std::string& v) {
               if (v.empty()) throw ConfigError(k + ": empty detector name");
               c.detector = v;
             }}},
      {"run.method", LGP_CHOICE(method, "lgp", "pgd_cls", "pgd_reg")},
      {"run.seed", LGP_INT(attack.seed)},
      {"attack.lambda1", LGP_REAL(attack.lambda1)},
      {"attack.lambda2", LGP_REAL(attack.lambda2)},
      {"attack.max_iters", LGP_INT(attack.max_iters)},
      {"attack.score_min", LGP_REAL(attack.score_min)},
      {"attack.distance", LGP_ENUM(attack.distance, kDistanceNames)},
      {"attack.target_source", LGP_ENUM(attack.target_source, kTargetNames)},
      {"attack.gt_source", LGP_ENUM(attack.gt_source, kGtNames)},
      {"attack.nms_iou", LGP_REAL(attack.nms_iou)},
      {"attack.prediction_score", LGP_REAL(attack.prediction_score)},
      {"loss.alpha", LGP_REAL(attack.weights.alpha)},
      {"loss.beta", LGP_REAL(attack.weights.beta)},
      {"loss.tau", LGP_REAL(attack.weights.tau)},
      {"loss.zeta", LGP_REAL(attack.weights.zeta)},
      {"loss.shape", LGP_BOOL(attack.terms.shape)},
      {"loss.loc", LGP_BOOL(attack.terms.loc)},
      {"loss.cls", LGP_BOOL(attack.terms.cls)},
      {"loss.eq6_literal", LGP_BOOL(attack.terms.eq6_literal)},
      {"limiter.delta", LGP_REAL(attack.delta)},
      {"limiter.eta", LGP_REAL(attack.eta)},
      {"limiter.epsilon", LGP_REAL(attack.epsilon)},
      {"assigner.n_i", LGP_INT(attack.n_i)},
      {"assigner.n_s", LGP_INT(attack.n_s)},
      {"assigner.iou_floor", LGP_REAL(attack.iou_floor)},
      {"optimizer.name", LGP_CHOICE(attack.optimizer.name, "adamax", "adam")},
      {"optimizer.lr", LGP_REAL(attack.optimizer.learning_rate)},
      {"optimizer.beta1", LGP_REAL(attack.optimizer.beta1)},
      {"optimizer.beta2", LGP_REAL(attack.optimizer.beta2)},
      {"optimizer.eps", LGP_REAL(attack.optimizer.eps)},
      {"pgd.budget", LGP_REAL(budget)},
      {"pgd.steps", LGP_INT(pgd_steps)},
      {"pgd.step_size", LGP_REAL(pgd_step_size)},
      {"eval.nms_iou", LGP_REAL(eval_nms_iou)},
      {"eval.score_min", LGP_REAL(eval_score_min)},
      {"demo.scenes", LGP_INT(demo_scenes)},
  };
  return table;
}

#undef LGP_REAL
#undef LGP_INT
#undef LGP_BOOL
#undef LGP_ENUM
#undef LGP_CHOICE

double default_zeta(const std::string& dataset) { return dataset == "dota" ? 3.0 : 0.1; }

}  // namespace

ToolConfig default_tool_config(const std::string& dataset) {
  if (dataset != "coco" && dataset != "dota") {
    throw ConfigError("unknown dataset kind '" + dataset + "'");
  }
  ToolConfig cfg;
  cfg.dataset = dataset;
  cfg.attack.weights.zeta = default_zeta(dataset);
  return cfg;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& [k, f] : fields()) out.push_back(k);
    return out;
  }();
  return keys;
}

ConfigMap parse_config(std::string_view text) {
  ConfigMap out;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    const std::string where = "config line " + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(where + ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (!section.empty()) key = section + "." + key;
    out[key] = value;
  }
  return out;
}

ConfigMap load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_config(ToolConfig& cfg, const ConfigMap& values) {
  for (const auto& [key, value] : values) {
    if (!fields().count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  if (const auto it = values.find("run.dataset"); it != values.end()) {
    fields().at("run.dataset").set(cfg, it->first, it->second);
    cfg.attack.weights.zeta = default_zeta(cfg.dataset);
  }
  for (const auto& [key, value] : values) {
    if (key != "run.dataset") fields().at(key).set(cfg, key, value);
  }
}

ConfigMap config_snapshot(const ToolConfig& cfg) {
  ConfigMap out;
  for (const auto& [key, field] : fields()) out[key] = field.get(cfg);
  return out;
}

std::string format_config(const ConfigMap& values) {
  std::ostringstream out;
  std::string section;
  for (const auto& [key, value] : values) {
    const auto dot = key.find('.');
    const std::string sec = dot == std::string::npos ? "" : key.substr(0, dot);
    const std::string name = dot == std::string::npos ? key : key.substr(dot + 1);
    if (sec != section) {
      if (!section.empty() || out.tellp() > 0) out << "\n";
      out << "[" << sec << "]\n";
      section = sec;
    }
    out << name << " = " << value << "\n";
  }
  return out.str();
}

PgdConfig make_pgd_config(const ToolConfig& cfg) {
  if (cfg.method != "pgd_cls" && cfg.method != "pgd_reg") {
    throw ConfigError("method '" + cfg.method + "' is not a pgd variant");
  }
  PgdConfig p;
  p.mode = cfg.method == "pgd_cls" ? PgdMode::kCls : PgdMode::kReg;
  p.eps = cfg.budget / 255.0;
  p.steps = cfg.pgd_steps;
  p.step_size = cfg.pgd_step_size > 0.0 ? cfg.pgd_step_size / 255.0 : -1.0;
  p.assign = {cfg.attack.n_i, cfg.attack.n_s, cfg.attack.iou_floor};
  return p;
}

}  // namespace lgp
