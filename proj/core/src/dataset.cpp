#include "lgp/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "lgp/errors.hpp"

namespace lgp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string join(const std::string& root, const std::string& name) {
  if (root.empty()) return name;
  return (fs::path(root) / name).string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::vector<DatasetRecord> load_coco_annotations(const std::string& path,
                                                 const std::string& image_root,
                                                 std::vector<std::string>* class_names) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw IngestionError(path + ": malformed JSON: " + e.what());
  }
  if (!doc.is_object() || !doc.contains("images") || !doc["images"].is_array()) {
    throw IngestionError(path + ": missing 'images' array");
  }

  try {
    std::map<long long, int> category_index;
    std::map<long long, std::string> category_name;
    if (doc.contains("categories")) {
      for (const auto& c : doc["categories"]) {
        const long long id = c.at("id").get<long long>();
        category_name[id] = c.contains("name") ? c["name"].get<std::string>() : std::to_string(id);
      }
    }
    if (doc.contains("annotations")) {
      // Categories referenced only by annotations still get an index.
      for (const auto& a : doc["annotations"]) {
        const long long id = a.at("category_id").get<long long>();
        if (!category_name.count(id)) category_name[id] = std::to_string(id);
      }
    }
    int next = 0;
    for (const auto& [id, name] : category_name) category_index[id] = next++;
    if (class_names) {
      class_names->clear();
      for (const auto& [id, name] : category_name) class_names->push_back(name);
    }

    std::vector<DatasetRecord> records;
    std::map<long long, std::size_t> by_id;
    for (const auto& img : doc["images"]) {
      const long long id = img.at("id").get<long long>();
      if (by_id.count(id)) throw IngestionError(path + ": duplicate image id " + std::to_string(id));
      by_id[id] = records.size();
      records.push_back({join(image_root, img.at("file_name").get<std::string>()), {},
                         DatasetFormat::kCocoJson});
    }

    if (doc.contains("annotations")) {
      std::size_t n = 0;
      for (const auto& a : doc["annotations"]) {
        const std::string where =
            path + ": annotation " + (a.contains("id") ? a["id"].dump() : "#" + std::to_string(n));
        ++n;
        const long long image_id = a.at("image_id").get<long long>();
        const auto it = by_id.find(image_id);
        if (it == by_id.end()) {
          throw IngestionError(where + " references unknown image id " + std::to_string(image_id));
        }
        const auto& bb = a.at("bbox");
        if (!bb.is_array() || bb.size() != 4) throw IngestionError(where + ": bbox needs 4 numbers");
        const double x = bb[0].get<double>();
        const double y = bb[1].get<double>();
        const double w = bb[2].get<double>();
        const double h = bb[3].get<double>();
        if (!(w > 0.0) || !(h > 0.0) || !std::isfinite(x) || !std::isfinite(y)) {
          throw IngestionError(where + ": non-positive box size");
        }
        auto& rec = records[it->second];
        rec.gts.push_back({static_cast<int>(rec.gts.size()), make_hbb(x + 0.5 * w, y + 0.5 * h, w, h),
                           category_index.at(a.at("category_id").get<long long>())});
      }
    }
    return records;
  } catch (const json::exception& e) {
    throw IngestionError(path + ": " + e.what());
  }
}

const std::vector<std::string>& dota_v1_classes() {
  static const std::vector<std::string> names = {
      "plane",         "ship",          "storage-tank",       "baseball-diamond",
      "tennis-court",  "basketball-court", "ground-track-field", "harbor",
      "bridge",        "large-vehicle", "small-vehicle",      "helicopter",
      "roundabout",    "soccer-ball-field", "swimming-pool"};
  return names;
}

namespace {

DatasetRecord load_dota_file(const fs::path& file, const std::string& image_root,
                             const std::vector<std::string>& class_names) {
  std::ifstream in(file);
  if (!in) throw IngestionError("cannot open " + file.string());
  DatasetRecord rec;
  rec.format = DatasetFormat::kDotaTxt;
  fs::path image = file;
  image.replace_extension(".png");
  rec.image_path = image_root.empty() ? image.string() : join(image_root, image.filename().string());

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("imagesource:", 0) == 0 || line.rfind("gsd:", 0) == 0) continue;
    std::istringstream ss(line);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    const std::string where = file.string() + ":" + std::to_string(line_no);
    if (tok.size() != 10) {
      throw IngestionError(where + ": expected 8 coordinates, a class and a difficulty, got " +
                           std::to_string(tok.size()) + " fields");
    }
    std::vector<Point> pts;
    for (int k = 0; k < 4; ++k) {
      double v[2];
      for (int j = 0; j < 2; ++j) {
        const std::string& s = tok[static_cast<std::size_t>(2 * k + j)];
        std::size_t used = 0;
        try {
          v[j] = std::stod(s, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != s.size() || !std::isfinite(v[j])) {
          throw IngestionError(where + ": bad coordinate '" + s + "'");
        }
      }
      pts.push_back({v[0], v[1]});
    }
    const auto it = std::find(class_names.begin(), class_names.end(), tok[8]);
    if (it == class_names.end()) throw IngestionError(where + ": unknown class '" + tok[8] + "'");
    if (tok[9] != "0" && tok[9] != "1") {
      throw IngestionError(where + ": difficulty must be 0 or 1, got '" + tok[9] + "'");
    }
    Box box;
    try {
      box = min_area_rect(pts);
    } catch (const InvalidArgument& e) {
      throw IngestionError(where + ": " + e.what());
    }
    rec.gts.push_back({static_cast<int>(rec.gts.size()), box,
                       static_cast<int>(it - class_names.begin())});
  }
  return rec;
}

}  // namespace

std::vector<DatasetRecord> load_dota_annotations(const std::string& path,
                                                 const std::string& image_root,
                                                 const std::vector<std::string>& class_names) {
  std::error_code ec;
  if (fs::is_directory(path, ec)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<DatasetRecord> out;
    for (const auto& f : files) out.push_back(load_dota_file(f, image_root, class_names));
    return out;
  }
  if (!fs::exists(path, ec)) throw IngestionError("no such file or directory: " + path);
  return {load_dota_file(path, image_root, class_names)};
}

Box min_area_rect(const std::vector<Point>& points) {
  if (points.size() < 3) throw InvalidArgument("need at least 3 points");

  // Andrew's monotone chain, counter-clockwise, collinear points dropped.
  std::vector<Point> pts = points;
  std::sort(pts.begin(), pts.end(),
            [](const Point& a, const Point& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  auto cross = [](const Point& o, const Point& a, const Point& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
  };
  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lo = k + 1; i-- > 0;) {
    while (k >= lo && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  if (hull.size() < 3) throw InvalidArgument("points are collinear");

  // One edge of the minimum rectangle is collinear with a hull edge.
  double best_area = INFINITY;
  Box best;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Point& a = hull[i];
    const Point& b = hull[(i + 1) % hull.size()];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    if (len == 0.0) continue;
    const double ux = (b.x - a.x) / len;
    const double uy = (b.y - a.y) / len;
    double min_u = INFINITY, max_u = -INFINITY, min_v = INFINITY, max_v = -INFINITY;
    for (const auto& p : hull) {
      const double u = p.x * ux + p.y * uy;
      const double v = -p.x * uy + p.y * ux;
      min_u = std::min(min_u, u);
      max_u = std::max(max_u, u);
      min_v = std::min(min_v, v);
      max_v = std::max(max_v, v);
    }
    const double w = max_u - min_u;
    const double h = max_v - min_v;
    if (w * h < best_area) {
      best_area = w * h;
      const double cu = 0.5 * (min_u + max_u);
      const double cv = 0.5 * (min_v + max_v);
      best = {cu * ux - cv * uy, cu * uy + cv * ux, w, h, std::atan2(uy, ux), BoxKind::kObb};
    }
  }

  // (w, h, t) and (h, w, t + pi/2) describe the same rectangle.
  constexpr double half_pi = std::numbers::pi / 2.0;
  const double t1 = normalize_angle(best.theta);
  const double t2 = normalize_angle(best.theta + half_pi);
  constexpr double tie = 1e-9;
  bool use_second = std::abs(t2) < std::abs(t1) - tie;
  if (std::abs(std::abs(t2) - std::abs(t1)) <= tie) use_second = t2 > t1;
  if (use_second) {
    std::swap(best.w, best.h);
    best.theta = t2;
  } else {
    best.theta = t1;
  }
  if (std::abs(best.theta) < 1e-12) best.theta = 0.0;
  return make_obb(best.cx, best.cy, best.w, best.h, best.theta);
}

}  // namespace lgp
