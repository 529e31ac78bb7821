#pragma once

// Synthetic scenes: flat colored rectangles on a gray noise background.

#include <cstdint>
#include <utility>
#include <vector>

#include "lgp/types.hpp"

namespace lgp {

struct SceneObject {
  Box box;  // axis-aligned
  int label = 0;
};

struct SceneSpec {
  int height = 128;
  int width = 128;
  std::vector<SceneObject> objects;
  std::uint64_t seed = 0;
};

inline constexpr double kMinObjectSeparation = 8.0;

/// Axis-aligned gap between two rectangles (0 when they touch or overlap).
double rect_separation(const Box& a, const Box& b);

/// Throws InvalidArgument for empty canvases, >5 objects, objects leaving the
/// canvas or pairs closer than kMinObjectSeparation.
void validate_scene(const SceneSpec& spec, int num_classes);

/// Deterministic in spec.seed; ground truth boxes are exactly the spec
/// rectangles, ids in spec order.
std::pair<Image, GroundTruthSet> render_scene(const SceneSpec& spec);

struct RandomSceneOptions {
  int height = 128;
  int width = 128;
  int min_objects = 1;
  int max_objects = 5;
  int min_size = 16;
  int max_size = 36;
  int margin = 4;
  int num_classes = 4;
};

/// Integer-aligned rectangles drawn by rejection sampling.
SceneSpec random_scene(std::uint64_t seed, const RandomSceneOptions& options = {});

}  // namespace lgp
