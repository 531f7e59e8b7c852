#include "pcis/types.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace pcis {

int Scene::num_instances() const {
  int m = 0;
  for (int id : instance_ids) m = std::max(m, id + 1);
  return m;
}

ClusterConfig ClusterConfig::with_bandwidth(double bw) {
  ClusterConfig cfg;
  cfg.bandwidth = bw;
  cfg.merge_radius = bw / 2.0;
  cfg.shift_tolerance = 1e-3 * bw;
  return cfg;
}

std::string Violation::to_string() const {
  std::ostringstream os;
  os << field;
  if (index >= 0) os << "[" << index << "]";
  os << ": " << reason;
  return os.str();
}

std::vector<Violation> validate_scene(const Scene& scene) {
  std::vector<Violation> out;
  const auto n = scene.coords.rows();

  if (scene.coords.cols() != 3)
    out.push_back({"coords", -1, "expected 3 columns"});
  if (scene.colors.rows() != n || scene.colors.cols() != 3)
    out.push_back({"colors", -1, "shape does not match coords"});
  if (static_cast<Eigen::Index>(scene.semantic_labels.size()) != n)
    out.push_back({"semantic_labels", -1, "length does not match coords"});
  if (static_cast<Eigen::Index>(scene.instance_ids.size()) != n)
    out.push_back({"instance_ids", -1, "length does not match coords"});
  if (!out.empty()) return out;  // sizes unusable, stop here

  for (Eigen::Index i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) {
      if (!std::isfinite(scene.coords(i, c))) {
        out.push_back({"coords", i, "non-finite coordinate"});
        break;
      }
    }
    for (int c = 0; c < 3; ++c) {
      const double v = scene.colors(i, c);
      if (!(v >= 0.0 && v <= 1.0)) {
        std::ostringstream os;
        os << "color channel " << c << " out of [0,1]: " << v;
        out.push_back({"colors", i, os.str()});
      }
    }
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    const int label = scene.semantic_labels[i];
    if (label < 0 || label >= scene.num_classes) {
      std::ostringstream os;
      os << "semantic label " << label << " outside [0," << scene.num_classes << ")";
      out.push_back({"semantic_labels", i, os.str()});
    }
  }

  std::set<int> present;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int id = scene.instance_ids[i];
    if (id < -1) {
      out.push_back({"instance_ids", i, "id below -1"});
    } else if (id >= 0) {
      present.insert(id);
    }
  }
  if (!present.empty()) {
    const int m = *present.rbegin() + 1;
    if (static_cast<int>(present.size()) != m) {
      std::ostringstream os;
      os << "non-consecutive instance ids: " << present.size() << " distinct ids, max " << m - 1;
      out.push_back({"instance_ids", -1, os.str()});
    }
  }
  return out;
}

Scene remap_instances(const Scene& scene) {
  std::set<int> present;
  for (int id : scene.instance_ids)
    if (id >= 0) present.insert(id);

  std::map<int, int> remap;
  int next = 0;
  for (int id : present) remap[id] = next++;

  Scene out = scene;
  for (auto& id : out.instance_ids)
    if (id >= 0) id = remap.at(id);
  return out;
}

std::string to_string(IntraNormalization v) {
  return v == IntraNormalization::kSum ? "sum" : "mean";
}

std::string to_string(StructureWeighting v) {
  return v == StructureWeighting::kSigmoidDistance ? "sigmoid_distance" : "uniform";
}

IntraNormalization intra_normalization_from_string(const std::string& s) {
  if (s == "sum") return IntraNormalization::kSum;
  if (s == "mean") return IntraNormalization::kMean;
  throw DataError("unknown intra_normalization: " + s);
}

StructureWeighting structure_weighting_from_string(const std::string& s) {
  if (s == "sigmoid_distance") return StructureWeighting::kSigmoidDistance;
  if (s == "uniform") return StructureWeighting::kUniform;
  throw DataError("unknown structure_weighting: " + s);
}

}  // namespace pcis
