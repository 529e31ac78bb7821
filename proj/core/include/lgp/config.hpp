#pragma once

// Run configuration: defaults, the key = value file format and overrides.
//
// File format: one `key = value` per line, `# comments`, and `[section]`
// headers that prefix the following keys with `section.`. Keys mirror the
// fields of ToolConfig; `config_keys()` lists them all.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "lgp/attack_loop.hpp"

namespace lgp {

using ConfigMap = std::map<std::string, std::string>;

struct ToolConfig {
  AttackConfig attack;
  std::string dataset = "coco";  // coco | dota, selects the zeta default
  std::string detector = "toy";
  std::string method = "lgp";  // lgp | pgd_cls | pgd_reg
  double budget = 8.0;         // pgd radius in 1/255 units
  int pgd_steps = 20;
  double pgd_step_size = 0.0;  // 1/255 units, 0 selects budget / 4
  double eval_nms_iou = 0.5;
  double eval_score_min = 0.05;
  int demo_scenes = 50;
};

/// Defaults for a dataset kind; only loss.zeta depends on it (0.1 for coco,
/// 3.0 for dota).
ToolConfig default_tool_config(const std::string& dataset = "coco");

const std::vector<std::string>& config_keys();

/// Throws ConfigError naming the line on malformed input.
ConfigMap parse_config(std::string_view text);
ConfigMap load_config_file(const std::string& path);

/// Applies every entry of `values`. `run.dataset` is applied first and
/// resets loss.zeta to that dataset's default unless `values` sets it.
/// Unknown keys and unparsable values throw ConfigError.
void apply_config(ToolConfig& cfg, const ConfigMap& values);

/// Every key with its current value; numbers use the shortest form that
/// parses back to the same double.
ConfigMap config_snapshot(const ToolConfig& cfg);

/// Renders a map in the file format, grouped by section.
std::string format_config(const ConfigMap& values);

PgdConfig make_pgd_config(const ToolConfig& cfg);

}  // namespace lgp
