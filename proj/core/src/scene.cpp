#include "lgp/scene.hpp"

#include <algorithm>
#include <cmath>

#include "lgp/errors.hpp"
#include "lgp/random.hpp"
#include "lgp/toy_detector.hpp"

namespace lgp {

namespace {

constexpr double kBackgroundLevel = 0.45;
constexpr double kBackgroundNoise = 0.08;
constexpr double kObjectNoise = 0.02;

}  // namespace

double rect_separation(const Box& a, const Box& b) {
  const double gx = std::max(a.cx - 0.5 * a.w, b.cx - 0.5 * b.w) -
                    std::min(a.cx + 0.5 * a.w, b.cx + 0.5 * b.w);
  const double gy = std::max(a.cy - 0.5 * a.h, b.cy - 0.5 * b.h) -
                    std::min(a.cy + 0.5 * a.h, b.cy + 0.5 * b.h);
  return std::max({gx, gy, 0.0});
}

void validate_scene(const SceneSpec& spec, int num_classes) {
  if (spec.height < 16 || spec.width < 16) throw InvalidArgument("scene canvas must be >= 16x16");
  if (spec.objects.size() > 5) throw InvalidArgument("scene holds at most 5 objects");
  for (std::size_t i = 0; i < spec.objects.size(); ++i) {
    const auto& o = spec.objects[i];
    validate(o.box);
    if (o.box.kind != BoxKind::kHbb) throw InvalidArgument("scene objects are axis-aligned");
    if (o.label < 0 || o.label >= num_classes) throw InvalidArgument("scene object label out of range");
    if (o.box.cx - 0.5 * o.box.w < 0.0 || o.box.cy - 0.5 * o.box.h < 0.0 ||
        o.box.cx + 0.5 * o.box.w > spec.width || o.box.cy + 0.5 * o.box.h > spec.height) {
      throw InvalidArgument("scene object " + std::to_string(i) + " leaves the canvas");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (rect_separation(o.box, spec.objects[j].box) < kMinObjectSeparation) {
        throw InvalidArgument("scene objects " + std::to_string(j) + " and " + std::to_string(i) +
                              " are closer than 8 px");
      }
    }
  }
}

std::pair<Image, GroundTruthSet> render_scene(const SceneSpec& spec) {
  const auto& palette = toy_palette();
  validate_scene(spec, static_cast<int>(palette.size()));
  Rng rng(spec.seed);
  Image img(spec.height, spec.width);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      const Point center{x + 0.5, y + 0.5};
      const SceneObject* owner = nullptr;
      for (const auto& o : spec.objects) {
        if (contains(o.box, center)) owner = &o;
      }
      for (int c = 0; c < 3; ++c) {
        const double v = owner != nullptr
                             ? palette[owner->label][c] + rng.uniform(-kObjectNoise, kObjectNoise)
                             : kBackgroundLevel + rng.uniform(-kBackgroundNoise, kBackgroundNoise);
        img.at(y, x, c) = std::clamp(v, 0.0, 1.0);
      }
    }
  }
  GroundTruthSet gts;
  for (std::size_t i = 0; i < spec.objects.size(); ++i) {
    gts.push_back({static_cast<int>(i), spec.objects[i].box, spec.objects[i].label});
  }
  return {std::move(img), std::move(gts)};
}

SceneSpec random_scene(std::uint64_t seed, const RandomSceneOptions& opt) {
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  SceneSpec spec;
  spec.height = opt.height;
  spec.width = opt.width;
  spec.seed = seed;
  const auto count = rng.uniform_int(opt.min_objects, opt.max_objects);
  for (int attempt = 0; attempt < 10000 && static_cast<std::int64_t>(spec.objects.size()) < count;
       ++attempt) {
    const auto w = rng.uniform_int(opt.min_size, opt.max_size);
    const auto h = rng.uniform_int(opt.min_size, opt.max_size);
    const auto x0 = rng.uniform_int(opt.margin, opt.width - opt.margin - w);
    const auto y0 = rng.uniform_int(opt.margin, opt.height - opt.margin - h);
    const auto label = static_cast<int>(rng.uniform_int(0, opt.num_classes - 1));
    const Box box = hbb_from_corners(static_cast<double>(x0), static_cast<double>(y0),
                                     static_cast<double>(x0 + w), static_cast<double>(y0 + h));
    const bool clear = std::all_of(spec.objects.begin(), spec.objects.end(), [&](const auto& o) {
      return rect_separation(box, o.box) >= kMinObjectSeparation;
    });
    if (clear) spec.objects.push_back({box, label});
  }
  return spec;
}

}  // namespace lgp
