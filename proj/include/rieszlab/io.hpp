#pragma once
// JSON / CSV serialization and atomic file output.
//
// Cloud schema:   {"n": int, "points": [[f64;n]...], "spacing": [f64...],
//                  "tags": ["interior"|"boundary"|...], "label": string}
// Measure schema: {"cloud": <cloud object or label string>, "weights": [f64...]}

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "rieszlab/kernel.hpp"

namespace rieszlab {

using Json = nlohmann::json;

inline Json cloud_to_json(const PointCloud& cloud) {
  Json j;
  j["n"] = cloud.dim();
  Json pts = Json::array();
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    Json row = Json::array();
    for (int d = 0; d < cloud.dim(); ++d) row.push_back(cloud.points(i, d));
    pts.push_back(std::move(row));
  }
  j["points"] = std::move(pts);
  Json sp = Json::array();
  for (Eigen::Index i = 0; i < cloud.size(); ++i) sp.push_back(cloud.spacing[i]);
  j["spacing"] = std::move(sp);
  Json tags = Json::array();
  for (const auto& t : cloud.tags) tags.push_back(t);
  j["tags"] = std::move(tags);
  j["label"] = cloud.label;
  return j;
}

inline PointCloud cloud_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("points") || !j.contains("spacing"))
    throw std::invalid_argument("cloud json: need n, points, spacing");
  const int n = j.at("n").get<int>();
  const auto& pts = j.at("points");
  PointCloud cloud;
  cloud.points.resize(static_cast<Eigen::Index>(pts.size()), n);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (static_cast<int>(pts[i].size()) != n) throw std::invalid_argument("cloud json: point arity");
    for (int d = 0; d < n; ++d) cloud.points(static_cast<Eigen::Index>(i), d) = pts[i][static_cast<std::size_t>(d)].get<double>();
  }
  const auto& sp = j.at("spacing");
  if (sp.size() != pts.size()) throw std::invalid_argument("cloud json: spacing length");
  cloud.spacing.resize(static_cast<Eigen::Index>(sp.size()));
  for (std::size_t i = 0; i < sp.size(); ++i) cloud.spacing[static_cast<Eigen::Index>(i)] = sp[i].get<double>();
  if (j.contains("tags") && !j.at("tags").empty()) {
    for (const auto& t : j.at("tags")) cloud.tags.push_back(t.get<std::string>());
  }
  cloud.label = j.value("label", std::string("cloud"));
  validate_cloud(cloud);
  return cloud;
}

inline Json measure_to_json(const DiscreteMeasure& mu, bool inline_cloud = true) {
  Json j;
  j["cloud"] = inline_cloud ? cloud_to_json(*mu.cloud) : Json(mu.cloud->label);
  Json w = Json::array();
  for (Eigen::Index i = 0; i < mu.size(); ++i) w.push_back(mu.weights[i]);
  j["weights"] = std::move(w);
  return j;
}

/// 15 significant digits, the report convention for energies and masses.
inline std::string fmt15(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

/// Writes via a temp file + rename so readers never observe a partial file.
inline void atomic_write_text(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string equilibrium_csv(const PointCloud& cloud, const Vec& weights, const Vec& potentials) {
  std::string s = "node,tag,weight,potential\n";
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    s += std::to_string(i) + ',';
    s += cloud.has_tags() ? cloud.tags[static_cast<std::size_t>(i)] : "";
    s += ',' + fmt15(weights[i]) + ',' + fmt15(potentials[i]) + '\n';
  }
  return s;
}

inline std::string balayage_csv(const PointCloud& target, const Vec& weights, const Vec& u_mu,
                                const Vec& u_swept) {
  std::string s = "node,weight,u_mu,u_swept\n";
  for (Eigen::Index i = 0; i < target.size(); ++i)
    s += std::to_string(i) + ',' + fmt15(weights[i]) + ',' + fmt15(u_mu[i]) + ',' +
         fmt15(u_swept[i]) + '\n';
  return s;
}

}  // namespace rieszlab
