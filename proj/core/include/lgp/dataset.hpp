#pragma once

// Annotation readers for COCO-style JSON and DOTA-style text files.

#include <string>
#include <vector>

#include "lgp/types.hpp"

namespace lgp {

enum class DatasetFormat { kCocoJson, kDotaTxt, kSynthetic };

struct DatasetRecord {
  std::string image_path;
  GroundTruthSet gts;
  DatasetFormat format = DatasetFormat::kSynthetic;
};

/// Reads the images/annotations/categories subset of a COCO annotation
/// file. Category ids are remapped to 0..K-1 in ascending id order and the
/// names written to `class_names` when given. Image paths are file names
/// joined to `image_root` (empty keeps them as is). GT ids are the positions
/// of the annotations within their image.
std::vector<DatasetRecord> load_coco_annotations(const std::string& path,
                                                 const std::string& image_root = {},
                                                 std::vector<std::string>* class_names = nullptr);

/// The 15 categories of DOTA-v1.0, in their usual order.
const std::vector<std::string>& dota_v1_classes();

/// Reads one DOTA label file, or every *.txt file of a directory in name
/// order. Each label line is `x1 y1 x2 y2 x3 y3 x4 y4 class difficulty`;
/// metadata lines starting with "imagesource:" or "gsd:" are skipped. The
/// image of `name.txt` is `image_root/name.png`, or the sibling path when
/// `image_root` is empty.
std::vector<DatasetRecord> load_dota_annotations(
    const std::string& path, const std::string& image_root = {},
    const std::vector<std::string>& class_names = dota_v1_classes());

/// Minimum-area enclosing rectangle of a point set, as an OBB whose angle is
/// the smallest in magnitude among its equivalent forms (positive on ties).
Box min_area_rect(const std::vector<Point>& points);

}  // namespace lgp
