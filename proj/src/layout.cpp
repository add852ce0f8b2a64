// Copyright (C) 2026 The cslayout Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "cslayout/layout.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cslayout {

namespace {

template <typename Enum, std::size_t N>
std::optional<Enum> parse_enum(std::string_view s, const std::array<std::string_view, N>& names) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<Enum>(i);
  }
  return std::nullopt;
}

constexpr std::array<std::string_view, 4> kOrientationNames = {"North", "East", "South", "West"};
constexpr std::array<std::string_view, 5> kSizeCodeNames = {"Default", "WidthLeft", "WidthRight",
                                                            "LengthUp", "LengthDown"};
constexpr std::array<std::string_view, 7> kRoomTypeNames = {
    "balcony", "bedroom", "kitchen", "bathroom", "living_dining", "study", "tatami"};

}  // namespace

std::string_view to_string(Orientation o) { return kOrientationNames[static_cast<int>(o)]; }
std::optional<Orientation> parse_orientation(std::string_view s) {
  return parse_enum<Orientation>(s, kOrientationNames);
}

std::string_view to_string(SizeCode c) { return kSizeCodeNames[static_cast<int>(c)]; }
std::optional<SizeCode> parse_size_code(std::string_view s) {
  return parse_enum<SizeCode>(s, kSizeCodeNames);
}

std::string_view to_string(RoomType t) { return kRoomTypeNames[static_cast<int>(t)]; }
std::optional<RoomType> parse_room_type(std::string_view s) {
  return parse_enum<RoomType>(s, kRoomTypeNames);
}

bool SizeRange::contains(const Size3& s, double tol) const {
  return s.length >= length_min - tol && s.length <= length_max + tol &&
         s.width >= width_min - tol && s.width <= width_max + tol &&
         s.height >= height_min - tol && s.height <= height_max + tol;
}

Size3 SizeRange::clamp(const Size3& s) const {
  return {std::clamp(s.length, length_min, length_max), std::clamp(s.width, width_min, width_max),
          std::clamp(s.height, height_min, height_max)};
}

double intersection_area(const AABB& a, const AABB& b) {
  const double w = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double h = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

double iou(const AABB& a, const AABB& b) {
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

AABB aabb(const FurnitureInstance& f) {
  const bool swapped = f.orientation == Orientation::East || f.orientation == Orientation::West;
  const double hx = 0.5 * (swapped ? f.size.length : f.size.width);
  const double hy = 0.5 * (swapped ? f.size.width : f.size.length);
  return {f.position.x - hx, f.position.y - hy, f.position.x + hx, f.position.y + hy};
}

LocalFrame local_frame(Orientation o) {
  switch (o) {
    case Orientation::North: return {{1, 0}, {0, 1}};
    case Orientation::East: return {{0, -1}, {1, 0}};
    case Orientation::South: return {{-1, 0}, {0, -1}};
    case Orientation::West: return {{0, 1}, {-1, 0}};
  }
  return {{1, 0}, {0, 1}};
}

FurnitureInstance resize_anchored(const FurnitureInstance& f, const Size3& new_size,
                                  SizeCode code) {
  FurnitureInstance out = f;
  out.size = new_size;
  const double dw = new_size.width - f.size.width;
  const double dl = new_size.length - f.size.length;
  double shift_u = 0.0;
  double shift_v = 0.0;
  switch (code) {
    case SizeCode::Default: break;
    case SizeCode::WidthLeft: shift_u = -0.5 * dw; break;
    case SizeCode::WidthRight: shift_u = 0.5 * dw; break;
    case SizeCode::LengthUp: shift_v = 0.5 * dl; break;
    case SizeCode::LengthDown: shift_v = -0.5 * dl; break;
  }
  const LocalFrame fr = local_frame(f.orientation);
  out.position.x += shift_u * fr.u.x + shift_v * fr.v.x;
  out.position.y += shift_u * fr.u.y + shift_v * fr.v.y;
  return out;
}

FurnitureInstance apply_size_code(const FurnitureInstance& f, SizeCode code) {
  if (!f.customized) {
    throw DomainError("apply_size_code: '" + f.category.name + "' is not customized furniture");
  }
  if (code == SizeCode::Default) return f;
  Size3 grown = f.size;
  if (code == SizeCode::WidthLeft || code == SizeCode::WidthRight) {
    grown.width *= 2.0;
  } else {
    grown.length *= 2.0;
  }
  return resize_anchored(f, f.size_range.clamp(grown), code);
}

AABB WallSegment::box() const {
  const double h = 0.5 * thickness;
  return {std::min(a.x, b.x) - (a.y == b.y ? 0.0 : h), std::min(a.y, b.y) - (a.x == b.x ? 0.0 : h),
          std::max(a.x, b.x) + (a.y == b.y ? 0.0 : h), std::max(a.y, b.y) + (a.x == b.x ? 0.0 : h)};
}

std::vector<Violation> validate_layout(const Layout& l, bool allow_overlap) {
  std::vector<Violation> out;
  std::vector<AABB> boxes;
  boxes.reserve(l.furniture.size());
  for (const auto& f : l.furniture) boxes.push_back(aabb(f));

  for (std::size_t i = 0; i < boxes.size(); ++i) {
    if (intersection_area(boxes[i], l.scene.bounds) <= 0.0) {
      std::ostringstream msg;
      msg << "furniture " << i << " ('" << l.furniture[i].category.name
          << "') lies outside the scene bounds";
      out.push_back({Violation::Kind::OutOfBounds, i, i, msg.str()});
    }
  }
  if (allow_overlap) return out;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    for (std::size_t j = i + 1; j < boxes.size(); ++j) {
      const double a = intersection_area(boxes[i], boxes[j]);
      if (a > kOverlapToleranceM2) {
        std::ostringstream msg;
        msg << "furniture " << i << " and " << j << " overlap by " << a << " m^2";
        out.push_back({Violation::Kind::Overlap, i, j, msg.str()});
      }
    }
  }
  return out;
}

std::vector<std::string> validate_scene(const RoomScene& s) {
  std::vector<std::string> problems;
  const auto inside = [&](const AABB& b) {
    constexpr double eps = 1e-9;
    return b.x_min >= s.bounds.x_min - eps && b.y_min >= s.bounds.y_min - eps &&
           b.x_max <= s.bounds.x_max + eps && b.y_max <= s.bounds.y_max + eps;
  };
  if (!(s.bounds.width() > 0.0 && s.bounds.height() > 0.0)) {
    problems.emplace_back("scene bounds have no area");
    return problems;
  }
  for (std::size_t i = 0; i < s.walls.size(); ++i) {
    const auto& w = s.walls[i];
    if (w.a.x != w.b.x && w.a.y != w.b.y) {
      problems.push_back("wall " + std::to_string(i) + " is not axis-aligned");
    }
    if (!inside(w.box())) problems.push_back("wall " + std::to_string(i) + " exceeds bounds");
  }
  const auto check_opening = [&](const AABB& b, const char* what, std::size_t i) {
    if (!inside(b)) problems.push_back(std::string(what) + " " + std::to_string(i) + " exceeds bounds");
    const bool on_wall = std::any_of(s.walls.begin(), s.walls.end(), [&](const WallSegment& w) {
      return intersection_area(w.box(), b) > 0.0;
    });
    if (!on_wall) problems.push_back(std::string(what) + " " + std::to_string(i) + " is not on a wall");
  };
  for (std::size_t i = 0; i < s.doors.size(); ++i) check_opening(s.doors[i], "door", i);
  for (std::size_t i = 0; i < s.windows.size(); ++i) check_opening(s.windows[i], "window", i);
  return problems;
}

std::optional<std::size_t> find_target_instance(const Layout& l, int category_id,
                                                bool* ambiguous) {
  std::optional<std::size_t> best;
  double best_area = -1.0;
  int candidates = 0;
  for (std::size_t i = 0; i < l.furniture.size(); ++i) {
    const auto& f = l.furniture[i];
    if (!f.customized || f.category.id != category_id) continue;
    ++candidates;
    const double area = f.default_size.width * f.default_size.length;
    if (area > best_area) {
      best_area = area;
      best = i;
    }
  }
  if (ambiguous) *ambiguous = candidates > 1;
  return best;
}

}  // namespace cslayout
