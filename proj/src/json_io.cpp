// Copyright (C) 2026 The cslayout Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "cslayout/json_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace cslayout {

using nlohmann::json;

namespace {

json box_json(const AABB& b) { return json::array({b.x_min, b.y_min, b.x_max, b.y_max}); }

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw DataError(path + ": " + what);
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "expected a finite number");
  return v;
}

const json& field(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) fail(path + "." + key, "missing field");
  return *it;
}

std::vector<double> numbers(const json& j, std::size_t n, const std::string& path) {
  if (!j.is_array() || j.size() != n) fail(path, "expected an array of " + std::to_string(n) + " numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

AABB box_from(const json& j, const std::string& path) {
  const auto v = numbers(j, 4, path);
  if (v[0] > v[2] || v[1] > v[3]) fail(path, "box min exceeds max");
  return {v[0], v[1], v[2], v[3]};
}

std::vector<AABB> boxes_from(const json& j, const char* key, const std::string& path) {
  std::vector<AABB> out;
  const auto it = j.find(key);
  if (it == j.end()) return out;
  if (!it->is_array()) fail(path + "." + key, "expected an array");
  for (std::size_t i = 0; i < it->size(); ++i) {
    out.push_back(box_from((*it)[i], path + "." + key + "[" + std::to_string(i) + "]"));
  }
  return out;
}

}  // namespace

json to_json(const RoomScene& s) {
  json walls = json::array();
  for (const auto& w : s.walls) {
    walls.push_back({{"a", {w.a.x, w.a.y}}, {"b", {w.b.x, w.b.y}}, {"thickness", w.thickness}});
  }
  json doors = json::array(), windows = json::array();
  for (const auto& d : s.doors) doors.push_back(box_json(d));
  for (const auto& w : s.windows) windows.push_back(box_json(w));
  return {{"room_type", std::string(to_string(s.room_type))},
          {"bounds", box_json(s.bounds)},
          {"walls", walls},
          {"doors", doors},
          {"windows", windows}};
}

json to_json(const FurnitureInstance& f) {
  const auto& d = f.default_size;
  const auto& r = f.size_range;
  return {{"category_id", f.category.id},
          {"category", f.category.name},
          {"customized", f.customized},
          {"x", f.position.x},
          {"y", f.position.y},
          {"length", f.size.length},
          {"width", f.size.width},
          {"height", f.size.height},
          {"orientation", std::string(to_string(f.orientation))},
          {"default_size", {d.length, d.width, d.height}},
          {"size_range", {r.length_min, r.length_max, r.width_min, r.width_max, r.height_min, r.height_max}}};
}

json to_json(const Layout& l) {
  json furniture = json::array();
  for (const auto& f : l.furniture) furniture.push_back(to_json(f));
  return {{"scene", to_json(l.scene)}, {"furniture", furniture}};
}

json to_json(const Violation& v) {
  json j = {{"kind", v.kind == Violation::Kind::Overlap ? "overlap" : "out_of_bounds"},
            {"first", v.first},
            {"message", v.message}};
  if (v.kind == Violation::Kind::Overlap) j["second"] = v.second;
  return j;
}

json to_json(const Palette& p) { return json::parse(p.to_json()); }

RoomScene scene_from_json(const json& j) {
  const std::string root = "scene";
  RoomScene s;
  const json& rt = field(j, "room_type", root);
  if (!rt.is_string()) fail(root + ".room_type", "expected a string");
  const auto type = parse_room_type(rt.get<std::string>());
  if (!type) fail(root + ".room_type", "unknown room type '" + rt.get<std::string>() + "'");
  s.room_type = *type;
  s.bounds = box_from(field(j, "bounds", root), root + ".bounds");
  if (const auto it = j.find("walls"); it != j.end()) {
    if (!it->is_array()) fail(root + ".walls", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string p = root + ".walls[" + std::to_string(i) + "]";
      const json& w = (*it)[i];
      const auto a = numbers(field(w, "a", p), 2, p + ".a");
      const auto b = numbers(field(w, "b", p), 2, p + ".b");
      s.walls.push_back({{a[0], a[1]}, {b[0], b[1]}, number(field(w, "thickness", p), p + ".thickness")});
    }
  }
  s.doors = boxes_from(j, "doors", root);
  s.windows = boxes_from(j, "windows", root);
  const auto problems = validate_scene(s);
  if (!problems.empty()) fail(root, problems.front());
  return s;
}

Layout layout_from_json(const json& j, const Catalog& catalog) {
  Layout l;
  l.scene = scene_from_json(field(j, "scene", "layout"));
  const json& arr = field(j, "furniture", "layout");
  if (!arr.is_array()) fail("layout.furniture", "expected an array");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string p = "layout.furniture[" + std::to_string(i) + "]";
    const json& fj = arr[i];
    const json& id_j = field(fj, "category_id", p);
    if (!id_j.is_number_integer()) fail(p + ".category_id", "expected an integer");
    const int id = id_j.get<int>();
    if (!catalog.contains(id)) fail(p + ".category_id", "unknown category " + std::to_string(id));
    Orientation facing = Orientation::North;
    if (const auto it = fj.find("orientation"); it != fj.end()) {
      const auto o = it->is_string() ? parse_orientation(it->get<std::string>()) : std::nullopt;
      if (!o) fail(p + ".orientation", "expected North, East, South or West");
      facing = *o;
    }
    FurnitureInstance f = catalog.make_instance(
        id, {number(field(fj, "x", p), p + ".x"), number(field(fj, "y", p), p + ".y")}, facing);
    if (fj.contains("length")) f.size.length = number(fj["length"], p + ".length");
    if (fj.contains("width")) f.size.width = number(fj["width"], p + ".width");
    if (fj.contains("height")) f.size.height = number(fj["height"], p + ".height");
    if (!(f.size.length > 0 && f.size.width > 0 && f.size.height > 0)) fail(p, "size must be positive");
    l.furniture.push_back(f);
  }
  return l;
}

Layout read_layout_file(const std::filesystem::path& path, const Catalog& catalog) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] != '{') {
    return parse_sample_record(text, catalog, path.string()).layout;
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": invalid JSON: " + e.what());
  }
  try {
    if (j.contains("furniture")) return layout_from_json(j, catalog);
    Layout l;
    l.scene = scene_from_json(j.contains("scene") ? j["scene"] : j);
    return l;
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace cslayout
